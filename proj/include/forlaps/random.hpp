#pragma once

#include <cstdint>
#include <random>

namespace forlaps {

// std::mt19937_64 output is fully specified by the standard; the standard
// distributions are not, so streams are derived from raw engine words to stay
// reproducible across standard libraries.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 bits of precision.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi]; returns lo when the interval is degenerate.
inline double uniform_real(Rng& rng, double lo, double hi) {
  if (!(hi > lo)) return lo;
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n) by rejection sampling; n must be > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

inline bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform01(rng) < p;
}

/// Fisher-Yates shuffle driven by uniform_index.
template <typename RandomIt>
void shuffle(RandomIt first, RandomIt last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::swap(first[i - 1], first[j]);
  }
}

}  // namespace forlaps
