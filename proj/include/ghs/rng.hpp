#pragma once

#include <cstdint>
#include <random>

namespace ghs {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent sub-stream seeds from a
/// single run seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix_seed(base ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

// Named sub-streams so that changing one stage does not perturb another.
namespace streams {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t sampling = 2;
inline constexpr std::uint64_t split = 3;
inline constexpr std::uint64_t shuffle = 4;
inline constexpr std::uint64_t dropout = 5;
inline constexpr std::uint64_t scene = 6;
}  // namespace streams

/// Uniform double in [0, 1) built from the top 53 bits; identical across
/// standard library implementations, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace ghs
