#pragma once

#include <cstdint>
#include <random>

namespace gbs {

/// Portable seeded generator: std::mt19937_64 (fully specified by the
/// standard) with distributions implemented here, since the standard
/// library's distributions differ between implementations.
///   uniform(): (next() >> 11 + 0.5) * 2^-53, in (0, 1)
///   normal():  Box-Muller, cosine branch then the cached sine branch
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace gbs
