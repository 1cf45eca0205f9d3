#pragma once

#include <cmath>
#include <cstdint>

namespace microscore::rng {

// SplitMix64 finalizer; full-avalanche mixing for counter-based streams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  return mix64(h ^ c);
}

// 53-bit uniform in (0,1); never exactly 0, so log() below is safe.
inline double uniform01(std::uint64_t h) {
  return static_cast<double>((h >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

// Standard normal keyed by (seed, stream, r, c): Box-Muller on two hashed
// uniforms. The value depends only on the key, never on traversal order.
inline double normal(std::uint64_t seed, std::uint64_t stream, std::int64_t r, std::int64_t c) {
  const std::uint64_t cell =
      (static_cast<std::uint64_t>(r) << 32) ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(c));
  const double u1 = uniform01(key(seed, stream, cell, 1));
  const double u2 = uniform01(key(seed, stream, cell, 2));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
}

// Deterministic seed fan-out for sub-components of a run.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
  return key(seed, tag, index);
}

}  // namespace microscore::rng
