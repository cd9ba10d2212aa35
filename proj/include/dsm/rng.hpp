#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dsm {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the n-th output is a pure function of
/// (key, n), where key is derived from (seed, stream id). Two streams with
/// distinct ids never share state, so per-agent draws do not depend on the
/// order in which agents are visited.
class CounterRng {
 public:
  CounterRng() = default;
  CounterRng(std::uint64_t seed, std::uint64_t stream_id)
      : key_(mix64(mix64(seed + kGoldenGamma) ^ (stream_id * 0xD1B54A32D192ED03ULL + 1))) {}

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGoldenGamma);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  /// Unbiased uniform integer on [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal via Box-Muller (one draw per call, no caching).
  double normal() noexcept {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Reserved stream ids; agent streams use ids [0, d).
inline constexpr std::uint64_t kTopologyStream = 0xFFFF'FFFF'0000'0001ULL;
inline constexpr std::uint64_t kInitStream = 0xFFFF'FFFF'0000'0002ULL;
inline constexpr std::uint64_t kDataStream = 0xFFFF'FFFF'0000'0003ULL;

}  // namespace dsm
