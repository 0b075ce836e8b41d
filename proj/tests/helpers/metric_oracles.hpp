// metric_oracles.hpp — brute-force reference implementations of the three
// evaluation metrics, written directly from their definitions and kept
// independent of the production code paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "selftalk/mesh.hpp"

namespace selftalk::testutil {

inline double dist3(const VertexSequence& a, const VertexSequence& b, std::size_t t,
                    std::size_t v) {
  const double dx = a.at(t, v, 0) - b.at(t, v, 0);
  const double dy = a.at(t, v, 1) - b.at(t, v, 1);
  const double dz = a.at(t, v, 2) - b.at(t, v, 2);
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double lve_oracle(const VertexSequence& gt, const VertexSequence& pred,
                         const std::vector<std::size_t>& lips, bool max_agg) {
  double sum = 0.0;
  for (std::size_t t = 0; t < gt.frames(); ++t) {
    double acc = 0.0;
    for (std::size_t v : lips) {
      const double d = dist3(gt, pred, t, v);
      acc = max_agg ? std::max(acc, d) : acc + d / static_cast<double>(lips.size());
    }
    sum += acc;
  }
  return sum / static_cast<double>(gt.frames());
}

inline double fdd_oracle(const VertexSequence& gt, const VertexSequence& pred,
                         const std::vector<std::size_t>& upper) {
  auto dyn = [](const VertexSequence& s, std::size_t v) {
    std::vector<double> norms;
    for (std::size_t t = 0; t < s.frames(); ++t) {
      double n2 = 0.0;
      for (std::size_t ax = 0; ax < 3; ++ax) n2 += s.at(t, v, ax) * s.at(t, v, ax);
      norms.push_back(std::sqrt(n2));
    }
    double mean = 0.0;
    for (double n : norms) mean += n;
    mean /= static_cast<double>(norms.size());
    double var = 0.0;
    for (double n : norms) var += (n - mean) * (n - mean);
    return std::sqrt(var / static_cast<double>(norms.size()));
  };
  double sum = 0.0;
  for (std::size_t v : upper) sum += dyn(pred, v) - dyn(gt, v);
  return sum / static_cast<double>(upper.size());
}

inline double lrp_oracle(const VertexSequence& gt, const VertexSequence& pred,
                         const std::vector<std::size_t>& lips, double mu) {
  std::size_t hits = 0, total = 0;
  for (std::size_t t = 0; t < gt.frames(); ++t) {
    for (std::size_t v : lips) {
      ++total;
      if (dist3(gt, pred, t, v) < mu) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace selftalk::testutil
