#pragma once

#include <cstdint>
#include <random>

namespace pd36 {

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Explicit random stream handed to stochastic layers.
///
/// std::mt19937_64 output is fully specified by the standard, but the
/// <random> distributions are not, so the conversions to floating point
/// live here to keep seeded runs reproducible across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(mix_seed(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform index in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) {
    // Rejection sampling keeps the result unbiased.
    const std::uint64_t limit = ~0ULL - (~0ULL % n);
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  /// Independent stream keyed by (this stream's next draw, index).
  Rng substream(std::uint64_t index) { return Rng(mix_seed(next_u64()) ^ mix_seed(index)); }

  /// Stream keyed only by (seed, index); does not advance any state.
  static Rng derive(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix_seed(seed) ^ mix_seed(index + 0x51ED27ULL));
  }

private:
  std::mt19937_64 engine_;
};

} // namespace pd36
