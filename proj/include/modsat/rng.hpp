#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace modsat {

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the named substream of `root` (e.g. "env", "trainer", "ga", "eval").
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(mix64(root) ^ h);
}

inline std::mt19937_64 substream(std::uint64_t root, std::string_view name) {
  return std::mt19937_64(derive_seed(root, name));
}

}  // namespace modsat
