#pragma once

#include <cstdint>

namespace photosplat {

/// Deterministic RNG stream. Wraps a 64-bit SplitMix/xorshift-style
/// generator with explicit uniform/normal conversions so sequences do not
/// depend on standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Derive an independent stream for a named sub-purpose.
  Rng fork(std::uint64_t stream_id) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);  // inclusive bounds
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::uint64_t state_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace photosplat
