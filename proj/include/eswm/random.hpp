#pragma once

#include <cstdint>
#include <random>

namespace eswm {

using Rng = std::mt19937_64;

// Uniform draw strictly inside (0, 1) built from the top 53 bits of the
// engine output, so results do not depend on the standard library's
// distribution implementations.
inline double uniform01(Rng& rng) {
  const std::uint64_t bits = rng() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream identified by (master, purpose, index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ purpose) ^ index);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t purpose,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(master, purpose, index));
}

}  // namespace eswm
