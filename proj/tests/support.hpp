#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ghs/ghs.hpp"

namespace ghs::test_support {

template <typename T>
nn::Batch<T> random_batch(std::size_t n, std::size_t h, std::size_t w, std::size_t c,
                          std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  nn::Batch<T> b(n, h, w, c);
  Rng rng(seed);
  for (auto& v : b.data) v = static_cast<T>(lo + (hi - lo) * uniform01(rng));
  return b;
}

template <typename T>
void randomize(std::vector<T>& v, std::uint64_t seed, double scale = 0.5) {
  Rng rng(seed);
  for (auto& x : v) x = static_cast<T>(scale * (2.0 * uniform01(rng) - 1.0));
}

/// Small desk-preset variant that keeps gradient checks and training fast.
inline ArchitectureConfig tiny_arch() {
  ArchitectureConfig a;
  a.block_filters = {3, 4};
  a.hidden_units = 5;
  return a;
}

/// 64×64 scene with four 32-pixel tiles and a handful of settlements.
inline synth::SceneParams small_scene(std::uint64_t seed = 5) {
  synth::SceneParams p;
  p.rows = 64;
  p.cols = 64;
  p.tile_pixels = 32;
  p.clusters = 4;
  p.buildings_per_cluster = 12;
  p.cluster_radius_px = 4;
  p.seed = seed;
  return p;
}

}  // namespace ghs::test_support
