#pragma once

#include <cstdint>

namespace rfda {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for sub-stream `index` of `seed` (subjects, replications, folds).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed + 0x632BE59BD9B4E019ULL) ^ (index * 0x9E3779B97F4A7C15ULL + 1));
}

/// Counter-based random stream: the k-th draw is mix64(key + k·γ), so a
/// stream is fully determined by its key and is independent of how other
/// streams are scheduled. Distributions are implemented here rather than
/// with <random> so that draws are identical across standard libraries.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) : key_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal by Box–Muller (one draw per call).
  double normal();
  /// Poisson by sequential inversion; mean must be in [0, 500].
  int poisson(double mean);

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rfda
