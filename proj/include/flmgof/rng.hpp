#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace flmgof {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Folds a list of stream coordinates into one 64-bit key.
///
/// stream_key(seed, {a, b, c}) = mix(mix(mix(seed ^ a') ^ b') ^ c') where each
/// coordinate is first passed through splitmix64, so nearby coordinates give
/// unrelated keys.
inline std::uint64_t stream_key(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> coords) {
  std::uint64_t key = splitmix64(seed);
  for (std::uint64_t c : coords) key = splitmix64(key ^ splitmix64(c + 1));
  return key;
}

using Engine = std::mt19937_64;

/// One independent generator per (seed, coordinates) address.
///
/// Bootstrap replicate b of a run seeded with s draws from
/// make_stream(s, {tag, b}); Monte Carlo replicate m from
/// make_stream(s, {tag, m}). Streams are addressed, never shared, so parallel
/// schedules cannot change the draws.
inline Engine make_stream(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> coords) {
  const std::uint64_t key = stream_key(seed, coords);
  std::seed_seq seq{static_cast<std::uint32_t>(key),
                    static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32)};
  return Engine(seq);
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Stream tags used across the library.
namespace stream_tag {
inline constexpr std::uint64_t bootstrap = 0xB0;
inline constexpr std::uint64_t curves = 0xC0;
inline constexpr std::uint64_t noise = 0xD0;
inline constexpr std::uint64_t projections = 0xE0;
}  // namespace stream_tag

}  // namespace flmgof
