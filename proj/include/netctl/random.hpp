#pragma once

#include <cstdint>
#include <random>

namespace netctl {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; maps (master, stream) to an independent seed so
/// parallel tasks draw from non-overlapping streams regardless of schedule.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(master, a), b);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace netctl
