#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace dareg::rng {

/// SplitMix64 finalizer: a full-avalanche mixing of a 64-bit word.
constexpr std::uint64_t mix(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a key from a seed and an arbitrary list of 64-bit words by
/// chained mixing. Used wherever a deterministic, statelessly indexable
/// random stream is required.
template <class... Words>
constexpr std::uint64_t derive(std::uint64_t seed, Words... words) noexcept {
  std::uint64_t h = mix(seed);
  ((h = mix(h ^ static_cast<std::uint64_t>(words))), ...);
  return h;
}

/// Bit pattern of a double, for folding grid values into seeds.
inline std::uint64_t bits(double x) noexcept {
  return std::bit_cast<std::uint64_t>(x);
}

/// Maps a 64-bit word to a uniform draw in (0, 1]; never returns 0 so the
/// logarithm in the Box-Muller transform stays finite.
inline double uniform_open(std::uint64_t word) noexcept {
  return (static_cast<double>(word >> 11) + 1.0) * 0x1.0p-53;
}

/// Counter-based standard normal draw: a pure function of
/// (seed, stream, index). Consecutive indices are independent, so values
/// may be generated in any order or in parallel.
inline double standard_normal(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index) noexcept {
  const double u1 = uniform_open(derive(seed, stream, 2 * index));
  const double u2 = uniform_open(derive(seed, stream, 2 * index + 1));
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dareg::rng
