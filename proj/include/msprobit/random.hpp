#pragma once

#include <cstdint>
#include <random>

namespace msprobit {

/// Seeded, splittable random stream.
///
/// Wraps a 64-bit Mersenne Twister, whose output sequence is fixed by the
/// standard, and derives all variates from it with our own transforms so that
/// results are bit-identical across standard libraries. `split(k)` returns an
/// independent child stream whose seed is a SplitMix64 hash of the parent seed
/// and `k`; it does not advance the parent.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  RandomStream split(std::uint64_t index) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Exponential with unit rate.
  double exponential();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace msprobit
