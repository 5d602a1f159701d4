#pragma once

#include <cmath>
#include <cstdint>

namespace rrb {

/// Deterministic, portable random stream (splitmix64). Every stochastic
/// component in the toolkit draws from one of these so that a seed fully
/// determines all outputs regardless of platform or thread count.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  /// Standard normal via Box-Muller; consumes two raw draws per call.
  double next_normal() {
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t state_;
};

/// Mixes one 64-bit value into a running hash. Chaining mix_seed calls is the
/// project-wide convention for deriving independent substreams (per UE, per
/// direction, per tree, per label) from a top-level seed.
inline std::uint64_t mix_seed(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a) {
  return mix_seed(seed, a);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b) {
  return mix_seed(mix_seed(seed, a), b);
}

}  // namespace rrb
