// Counter-mode SplitMix64.  The n-th variate of a stream is a pure function
// of (seed, n), so draws can be produced in any order, from any thread, or
// re-derived independently, with bit-identical results.

#pragma once

#include <cmath>
#include <cstdint>

namespace harqrate::rng {

// SplitMix64 finalizer (Steele/Lea/Flood; Vigna's fixed-increment variant).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Raw 64 bits for position `counter` of the stream `seed`.  Equals the
// (counter+1)-th output of a sequential SplitMix64 seeded with `seed`.
inline std::uint64_t bits(std::uint64_t seed, std::uint64_t counter) {
  return mix64(seed + (counter + 1) * kGolden);
}

// Uniform draw strictly inside (0, 1).
inline double uniform(std::uint64_t seed, std::uint64_t counter) {
  return (static_cast<double>(bits(seed, counter) >> 11) + 0.5) * 0x1p-53;
}

// Exponential(1) draw by inverse CDF, -ln U.
inline double exponential(std::uint64_t seed, std::uint64_t counter) {
  return -std::log(uniform(seed, counter));
}

// Independent child seed for substream `label` (sweep points, batches, ...).
// Uses a distinct mixing chain so child streams never collide with draw
// counters of the parent.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) {
  return mix64(mix64(seed ^ 0xA0761D6478BD642FULL) + label * kGolden);
}

}  // namespace harqrate::rng
