#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghs/error.hpp"
#include "ghs/raster/grid.hpp"
#include "ghs/raster/tiles.hpp"
#include "ghs/rng.hpp"
#include "ghs/sampling/labels.hpp"

namespace ghs::sampling {

/// Systematic tile selection. Tiles are ranked checkerboard-first
/// ((tile_row + tile_col) even before odd, row-major within each colour) and
/// the first ceil(n·fraction) are kept, so fraction 0.5 is exactly the
/// checkerboard. Zones dominated by water/nodata keep every tile that has
/// valid data, regardless of fraction.
inline std::vector<raster::TileIndex> select_training_tiles(
    const std::vector<raster::TileIndex>& tiles, double fraction, bool water_zone) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("tile fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  std::vector<raster::TileIndex> out;
  if (water_zone) {
    for (const auto& t : tiles)
      if (t.valid_pixels > 0) out.push_back(t);
    return out;
  }
  std::vector<raster::TileIndex> ranked = tiles;
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    const auto pa = (a.tile_row + a.tile_col) % 2, pb = (b.tile_row + b.tile_col) % 2;
    if (pa != pb) return pa < pb;
    return std::pair(a.tile_row, a.tile_col) < std::pair(b.tile_row, b.tile_col);
  });
  const auto keep = static_cast<std::size_t>(
      std::ceil(static_cast<double>(tiles.size()) * fraction - 1e-9));
  ranked.resize(std::min(keep, ranked.size()));
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return std::pair(a.tile_row, a.tile_col) < std::pair(b.tile_row, b.tile_col);
  });
  return ranked;
}

/// A zone counts as water-dominated when most of its tiles are.
inline bool is_water_zone(const std::vector<raster::TileIndex>& tiles) {
  std::size_t water = 0;
  for (const auto& t : tiles) water += t.water_dominated;
  return 2 * water > tiles.size();
}

/// Fills valid_pixels / water_dominated from a validity mask. A tile is
/// water-dominated when less than half of it carries valid data.
inline void annotate_tiles(std::vector<raster::TileIndex>& tiles, const raster::ValidityMask& valid) {
  for (auto& t : tiles) {
    std::size_t n = 0;
    for (std::size_t r = t.row0; r < t.row0 + t.rows; ++r)
      for (std::size_t c = t.col0; c < t.col0 + t.cols; ++c) n += valid(r, c);
    t.valid_pixels = n;
    t.water_dominated = 2 * n < t.pixels();
  }
}

struct SampleRef {
  std::uint32_t tile = 0;  // index into SampleSet::tiles
  std::uint32_t row = 0;   // patch center, zone coordinates
  std::uint32_t col = 0;
  std::uint8_t label = 0;  // 1 = built-up patch
};

struct SampleSet {
  std::vector<raster::TileIndex> tiles;
  std::vector<SampleRef> samples;
  std::size_t built_up = 0;
  std::size_t non_built_up = 0;
  std::size_t non_built_up_candidates = 0;
  double non_bu_rate = 0.6;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

/// Marks every pixel whose size×size label neighbourhood (clipped to the
/// grid) holds at least one built-up pixel. Separable max filter.
inline std::vector<std::uint8_t> built_up_blocks(const raster::RasterGrid& labels,
                                                 std::size_t size = 5) {
  const std::size_t h = labels.height, w = labels.width, half = size / 2;
  std::vector<std::uint8_t> bu(h * w), horiz(h * w, 0), out(h * w, 0);
  for (std::size_t i = 0; i < h * w; ++i) bu[i] = labels.data[i] == 1.0f;
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t lo = c >= half ? c - half : 0, hi = std::min(w - 1, c + half);
      std::uint8_t v = 0;
      for (std::size_t k = lo; k <= hi && !v; ++k) v = bu[r * w + k];
      horiz[r * w + c] = v;
    }
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t lo = r >= half ? r - half : 0, hi = std::min(h - 1, r + half);
    for (std::size_t c = 0; c < w; ++c) {
      std::uint8_t v = 0;
      for (std::size_t k = lo; k <= hi && !v; ++k) v = horiz[k * w + c];
      out[r * w + c] = v;
    }
  }
  return out;
}

/// Two-stage sample set over the selected tiles: every built-up patch (5×5
/// label block with at least one built-up pixel) is kept and each
/// non-built-up patch is kept independently with probability
/// `non_bu_rate`. Patches centred on invalid composite pixels or on label
/// nodata are skipped.
inline SampleSet build_sample_set(const raster::ValidityMask& composite_valid,
                                  const raster::RasterGrid& labels,
                                  const std::vector<raster::TileIndex>& selected,
                                  double non_bu_rate, Rng& rng, std::uint64_t seed = 0) {
  if (composite_valid.width != labels.width || composite_valid.height != labels.height) {
    throw ShapeError("composite and label grids are not co-registered");
  }
  if (!(non_bu_rate >= 0.0 && non_bu_rate <= 1.0)) {
    throw ConfigError("non-built-up rate must lie in [0, 1]");
  }
  SampleSet set;
  set.tiles = selected;
  set.non_bu_rate = non_bu_rate;
  set.seed = seed;
  const auto blocks = built_up_blocks(labels);
  for (std::size_t t = 0; t < selected.size(); ++t) {
    const auto& tile = selected[t];
    if (tile.row0 + tile.rows > labels.height || tile.col0 + tile.cols > labels.width) {
      throw ShapeError("tile " + tile.name() + " exceeds the label grid");
    }
    for (std::size_t r = tile.row0; r < tile.row0 + tile.rows; ++r) {
      for (std::size_t c = tile.col0; c < tile.col0 + tile.cols; ++c) {
        if (!composite_valid(r, c) || labels.is_nodata(labels.at(0, r, c))) continue;
        const bool bu = blocks[r * labels.width + c] != 0;
        if (!bu) {
          ++set.non_built_up_candidates;
          if (!(uniform01(rng) < non_bu_rate)) continue;
        }
        set.samples.push_back({static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(r),
                               static_cast<std::uint32_t>(c), static_cast<std::uint8_t>(bu)});
        (bu ? set.built_up : set.non_built_up) += 1;
      }
    }
  }
  if (set.built_up == 0) {
    set.warnings.push_back("no built-up patches in the selected tiles");
  }
  return set;
}

struct ClassStats {
  double built_up = 0.0;
  double non_built_up = 0.0;
};

inline ClassStats class_stats(const SampleSet& set) {
  const std::size_t n = set.built_up + set.non_built_up;
  if (n == 0) throw StatisticError("class_stats on an empty sample set");
  const double bu = static_cast<double>(set.built_up) / static_cast<double>(n);
  return {bu, 1.0 - bu};
}

inline nlohmann::json sample_manifest(const SampleSet& set) {
  nlohmann::json tiles = nlohmann::json::array();
  for (const auto& t : set.tiles) tiles.push_back(t.name());
  nlohmann::json j{
      {"seed", set.seed},
      {"non_bu_rate", set.non_bu_rate},
      {"samples", set.size()},
      {"built_up", set.built_up},
      {"non_built_up", set.non_built_up},
      {"non_built_up_candidates", set.non_built_up_candidates},
      {"tiles", tiles},
      {"warnings", set.warnings},
  };
  if (!set.empty()) {
    const auto s = class_stats(set);
    j["built_up_fraction"] = s.built_up;
    j["non_built_up_fraction"] = s.non_built_up;
  }
  return j;
}

}  // namespace ghs::sampling
