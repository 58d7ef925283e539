#pragma once

#include <cstdint>

namespace sage {

/// Deterministic xoshiro256++ stream seeded through splitmix64.
///
/// The integer stream is bit-identical for a given seed on every platform;
/// the floating-point helpers depend only on IEEE-754 double arithmetic.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform draw in [0, 1) with 53 bits of precision.
  double uniform01();

  /// Standard normal draw (Marsaglia polar method, cached spare).
  double normal();
  double normal(double mean, double stddev);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t state_[4];
  std::uint64_t seed_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stable sub-stream derivation: same (seed, stream) always yields the same
/// derived seed, and distinct streams decorrelate.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace sage
