#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mkit {

/// Seeded random stream with portable output: all draws are derived from
/// mt19937_64 words with fixed arithmetic, so identical seeds reproduce the
/// same values on every platform. Standard-library distributions are avoided
/// because their draw sequences are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_word() { return gen_(); }

  /// Uniform double in [0, 1), 53 bits of randomness.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi). Returns lo when lo == hi.
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  /// Uniform integer in [lo, hi], inclusive on both ends.
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }

  /// Standard normal via Box-Muller; draws exactly two words per call.
  double normal(double mean, double sigma) {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    return mean + sigma * r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mkit
