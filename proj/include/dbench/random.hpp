#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dbench {

/// Seeded generator with platform-independent variates. The standard
/// distributions are implementation-defined, so conversions are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Exponential variate with the given mean.
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return std::uint64_t(uniform() * double(n)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dbench
