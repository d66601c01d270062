#pragma once

#include "dyadlab/dyadic.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace dyadlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

/// Stream keyed by (seed, stream) so results do not depend on evaluation order.
inline std::mt19937_64 keyed_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(mix_seed(seed, stream));
}

/// Stream keyed by an interval; nested trees therefore see identical draws.
inline std::mt19937_64 interval_rng(std::uint64_t seed, const DyadicInterval& I) {
  const std::uint64_t key = mix_seed(static_cast<std::uint64_t>(static_cast<std::int64_t>(I.scale)),
                                     static_cast<std::uint64_t>(I.position));
  return std::mt19937_64(mix_seed(seed, key));
}

/// Uniform double in [0, 1) with 53 random bits; portable across standard libraries.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Log-uniform in [lo, hi], lo > 0.
inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(rng() % span);
}

inline bool coin(std::mt19937_64& rng) { return (rng() >> 63) != 0; }

}  // namespace dyadlab
