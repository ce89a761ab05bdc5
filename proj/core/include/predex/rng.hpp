#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace predex {

// All stochastic code draws from one engine seeded once per run.
using Rng = std::mt19937_64;

// Uniform double in [0, 1). Uses the top 53 bits of the 64-bit draw so the
// sequence is identical on every platform; std::uniform_real_distribution
// does not guarantee that.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi]. Requires lo <= hi; returns lo when the
// interval is degenerate.
inline double uniform_in(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform index in {0, ..., n-1}. Requires n >= 1.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  std::size_t i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

// Standard normal via Box-Muller, again for cross-platform reproducibility.
// The first uniform is shifted into (0, 1] so the log is finite.
inline double normal01(Rng& rng) {
  double u1 = 1.0 - uniform01(rng);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline double draw_normal(Rng& rng, double mean, double stddev) {
  return mean + stddev * normal01(rng);
}

}  // namespace predex
