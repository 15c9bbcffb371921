#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace neraug {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t h = 14695981039346656037ULL) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream keyed by (seed, label, index). Parallel workers that
/// derive their streams this way produce results independent of scheduling.
inline Rng derive_stream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ fnv1a(label));
  h = splitmix64(h ^ index);
  return Rng(h);
}

/// Uniform integer in [lo, hi]. Hand-rolled so draws are identical across
/// standard library implementations.
inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::size_t>(rng());
  const std::uint64_t threshold = (0 - span) % span;
  std::uint64_t draw = rng();
  while (draw < threshold) draw = rng();
  return lo + static_cast<std::size_t>(draw % span);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace neraug
