#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace oectmc {

/// SplitMix64 finalizer. Used only to derive well-separated seeds; the
/// streams themselves are std::mt19937_64.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a, for hashing operating-point labels into stream keys.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Roles of the independent streams used by one Monte Carlo seed.
enum class StreamRole : std::uint64_t {
  Symbols = 1,
  Emission = 2,
  BindingDA = 3,
  BindingFHT = 4,
  Noise = 5,
  Calibration = 6,
};

/// Seed for the stream identified by (master, point, seed index, role).
///
/// The derivation is a pure function of its arguments, so results never
/// depend on which worker thread evaluates a seed or in which order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point_key,
                                    std::uint64_t seed_index, StreamRole role) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ point_key);
  h = splitmix64(h ^ (seed_index * 0xd1b54a32d192ed03ULL));
  h = splitmix64(h ^ static_cast<std::uint64_t>(role));
  return h;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t master, std::uint64_t point_key,
                          std::uint64_t seed_index, StreamRole role) {
  const std::uint64_t s = derive_seed(master, point_key, seed_index, role);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return Engine(seq);
}

} // namespace oectmc
