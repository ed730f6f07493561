#pragma once

#include <cstdint>
#include <random>

namespace popdyn {

// Named per-purpose streams expanded from one user seed.
enum class Stream : std::uint64_t {
  kInit = 1,
  kPerturbation = 2,
  kSchedule = 3,
  kProbe = 4,
  kInstance = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ static_cast<std::uint64_t>(stream)) + index);
}

using Rng = std::mt19937_64;

}  // namespace popdyn
