#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace restore {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a child seed from a parent seed and a list of indices. Order matters,
// scheduling does not: the same (base, indices) always yields the same seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = mix64(base);
  for (auto i : indices) h = mix64(h ^ mix64(i + 0x632be59bd9b4e019ULL));
  return h;
}

// Named per-episode streams.
enum class Stream : std::uint64_t { damage = 1, repair_time = 2, budget = 3, resources = 4, policy = 5 };

inline Rng make_stream(std::uint64_t seed, Stream s) {
  return Rng{derive_seed(seed, {static_cast<std::uint64_t>(s)})};
}

}  // namespace restore
