// rng.hpp — seeded random source with hand-rolled transforms so streams are
// identical across platforms and standard-library versions.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace selftalk {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; one draw per call, the paired value is discarded.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Uniform integer in [0, n); n must be > 0. Modulo bias is irrelevant at
  // the corpus sizes involved.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    if (items.size() < 2) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
      std::swap(items[i], items[index(i + 1)]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace selftalk
