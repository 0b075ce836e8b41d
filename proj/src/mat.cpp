#include "selftalk/mat.hpp"

namespace selftalk {

Mat resample_rows(const Mat& m, std::size_t out_rows) {
  if (m.rows == 0) throw InvalidArgument("resample_rows: empty input");
  if (out_rows == 0) throw InvalidArgument("resample_rows: zero output rows");
  Mat out(out_rows, m.cols);
  const std::size_t in_rows = m.rows;
  for (std::size_t t = 0; t < out_rows; ++t) {
    double pos = 0.0;
    if (out_rows > 1 && in_rows > 1) {
      pos = static_cast<double>(t) * static_cast<double>(in_rows - 1) /
            static_cast<double>(out_rows - 1);
    }
    const std::size_t i0 = static_cast<std::size_t>(pos);
    const std::size_t i1 = (i0 + 1 < in_rows) ? i0 + 1 : i0;
    const double f = pos - static_cast<double>(i0);
    for (std::size_t c = 0; c < m.cols; ++c) {
      out.at(t, c) = (1.0 - f) * m.at(i0, c) + f * m.at(i1, c);
    }
  }
  return out;
}

}  // namespace selftalk
