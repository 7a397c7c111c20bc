#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace chargegrid {

/// Purposes that key independent random streams derived from one seed.
enum class StreamPurpose : std::uint64_t {
  lines = 1,
  thinning = 2,
  placement = 3,
  trips = 4,
  assignment = 5,
  rejection = 6,
  replicate = 7,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Folds a sequence of keys into one 64-bit value. Distinct key tuples give
/// unrelated outputs, so every (seed, purpose, index...) gets its own stream.
inline constexpr std::uint64_t stream_key(std::uint64_t seed,
                                          std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(seed ^ 0x6A09E667F3BCC909ull);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x3C6EF372FE94F82Bull));
  return h;
}

/// FNV-1a hash, used to key streams by names such as road identifiers.
inline constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

using Engine = std::mt19937_64;

inline Engine make_stream(std::uint64_t seed, StreamPurpose purpose,
                          std::initializer_list<std::uint64_t> extra = {}) {
  std::uint64_t h = stream_key(seed, {static_cast<std::uint64_t>(purpose)});
  for (std::uint64_t k : extra) h = splitmix64(h ^ splitmix64(k));
  return Engine{h};
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace chargegrid
