// mat.hpp — row-major double matrix used for plain (non-differentiable) data.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "selftalk/errors.hpp"

namespace selftalk {

struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  Mat(std::size_t r, std::size_t c, std::vector<double> data)
      : rows(r), cols(c), v(std::move(data)) {
    if (v.size() != rows * cols) throw InvalidArgument("Mat: data size does not match shape");
  }

  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

  bool all_finite() const {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }
};

// Linear row resampling shared by every rate conversion in the pipeline:
// output row t samples position t*(rows-1)/(out_rows-1), endpoints inclusive.
Mat resample_rows(const Mat& m, std::size_t out_rows);

}  // namespace selftalk
