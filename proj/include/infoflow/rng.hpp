#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

// Deterministic random number utilities.
//
// Everything downstream (column shuffles, synthetic panels) must produce
// identical output for identical seeds regardless of thread count or
// execution order, so randomness is organized as independent streams: one
// stream per column / per ticker, each seeded by a fixed mixing function of
// (master_seed, stream_index). The engine is std::mt19937_64, whose output
// sequence is pinned by the standard; the draw algorithms on top of it are
// spelled out here because the std::*_distribution adapters are
// implementation-defined and would not reproduce across toolchains.

namespace infoflow {

/// SplitMix64 finalizer (public-domain mixing function): one full
/// avalanche round over a 64-bit value.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for sub-stream `stream_index` of a run keyed by `master_seed`:
///   splitmix64(splitmix64(master_seed) ^ splitmix64(stream_index + 1)).
/// Pure function of its arguments; independent of execution order.
constexpr std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                           std::uint64_t stream_index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(stream_index + 1));
}

/// One seedable random stream with explicitly specified draw algorithms.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Unbiased integer in [0, bound) via rejection sampling: draw until the
  /// raw value falls below the largest multiple of `bound`, then reduce.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t reject_under = (0ULL - bound) % bound;  // 2^64 mod bound
    std::uint64_t x = eng_();
    while (x < reject_under) x = eng_();
    return x % bound;
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller, cosine branch only: two uniforms
  /// consumed, one value returned. u1 is shifted into (0, 1] so the log is
  /// always finite.
  double gaussian() {
    const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace infoflow
