#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace graphrob {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed split rule: fold each index into the root with mix64, so
// derive_seed(root, {g, t}) = mix64(mix64(mix64(root) ^ g) ^ t). Every
// Monte-Carlo trial gets its own generator seeded this way from
// (root seed, grid index, trial index), independent of scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t root,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(root);
  for (std::uint64_t p : path) s = mix64(s ^ p);
  return s;
}

inline Rng make_rng(std::uint64_t root, std::initializer_list<std::uint64_t> path = {}) {
  return Rng(derive_seed(root, path));
}

}  // namespace graphrob
