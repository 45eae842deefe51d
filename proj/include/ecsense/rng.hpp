#pragma once

#include <cstdint>
#include <random>

namespace ecsense {

/// SplitMix64 finalizer; a bijective 64-bit mix.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for child stream `index` of `seed`. Distinct (seed, index) pairs give
/// statistically independent streams; the mapping depends on nothing else,
/// so ensembles are reproducible and independent of execution order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Per-trajectory random stream. Doubles are built from the top 53 bits of
/// the engine output so the sequence is identical across standard libraries.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  Stream(std::uint64_t seed, std::uint64_t index) : engine_(derive_seed(seed, index)) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace ecsense
