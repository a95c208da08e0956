#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ghs/error.hpp"
#include "ghs/eval/footprints.hpp"
#include "ghs/raster/grid.hpp"
#include "ghs/raster/tiles.hpp"
#include "ghs/rng.hpp"

namespace ghs::synth {

inline constexpr std::size_t kBands = 4;
inline constexpr double kCompositeNodata = -32768.0;

/// Generative process for one synthetic zone. Buildings are axis-aligned
/// rectangles snapped to half a pixel, grouped around cluster centres.
struct SceneParams {
  std::size_t rows = 512;
  std::size_t cols = 512;
  std::size_t tile_pixels = 256;
  double pixel_size = 10.0;
  double origin_x = 500000.0;
  double origin_y = 5000000.0;

  std::size_t clusters = 18;
  std::size_t buildings_per_cluster = 110;
  double cluster_radius_px = 12.0;     // std-dev of building offsets
  std::size_t building_min_px = 2;     // side length range
  std::size_t building_max_px = 6;

  std::array<double, kBands> background{900, 1100, 1300, 2800};
  std::array<double, kBands> built_offset{1000, 1000, 1100, -900};
  // Per-building scale of the built offset, uniform in [min, max]; roofs of
  // weaker contrast are the ambiguous cases.
  double contrast_min = 0.3;
  double contrast_max = 1.0;
  double noise_sigma = 150.0;
  double nodata_fraction = 0.002;
  std::uint64_t seed = 42;

  void validate() const {
    if (rows < 5 || cols < 5) throw ConfigError("zone must be at least 5x5 pixels");
    if (tile_pixels < 5) throw ConfigError("tile size must be at least 5 pixels");
    if (building_min_px < 1 || building_max_px < building_min_px) {
      throw ConfigError("building size range must satisfy 1 <= min <= max");
    }
    if (!(pixel_size > 0.0)) throw ConfigError("pixel size must be positive");
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
    if (!(contrast_min > 0.0 && contrast_min <= contrast_max)) {
      throw ConfigError("building contrast range must satisfy 0 < min <= max");
    }
    if (!(nodata_fraction >= 0.0 && nodata_fraction < 1.0)) {
      throw ConfigError("nodata fraction must lie in [0, 1)");
    }
  }
};

struct SyntheticZone {
  std::string zone_id;
  raster::RasterGrid composite;  // i16, 4 bands, nodata -32768
  raster::RasterGrid labels;     // u8, 1 built-up / 0 background
  eval::FootprintSet footprints;
  std::vector<raster::TileIndex> tiles;
};

namespace detail {

// Places one rectangle fully inside the zone, in half-pixel units.
struct HalfRect {
  std::int64_t x0, y0, x1, y1;  // columns / rows of half-pixel cells, half-open
  double contrast = 1.0;         // fraction of the built offset this roof shows
};

inline HalfRect place_building(const SceneParams& p, double cx, double cy, Rng& rng,
                               std::normal_distribution<double>& offset) {
  const std::int64_t max_x = static_cast<std::int64_t>(2 * p.cols);
  const std::int64_t max_y = static_cast<std::int64_t>(2 * p.rows);
  const auto span = static_cast<std::int64_t>(2 * (p.building_max_px - p.building_min_px) + 1);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto w = static_cast<std::int64_t>(2 * p.building_min_px) +
                   static_cast<std::int64_t>(uniform01(rng) * static_cast<double>(span));
    const auto h = static_cast<std::int64_t>(2 * p.building_min_px) +
                   static_cast<std::int64_t>(uniform01(rng) * static_cast<double>(span));
    const double x = cx + offset(rng) * p.cluster_radius_px;
    const double y = cy + offset(rng) * p.cluster_radius_px;
    const auto x0 = static_cast<std::int64_t>(std::floor(2.0 * x)) - w / 2;
    const auto y0 = static_cast<std::int64_t>(std::floor(2.0 * y)) - h / 2;
    if (x0 >= 0 && y0 >= 0 && x0 + w <= max_x && y0 + h <= max_y) {
      const double contrast = p.contrast_min + uniform01(rng) * (p.contrast_max - p.contrast_min);
      return {x0, y0, x0 + w, y0 + h, contrast};
    }
  }
  throw GenerationError("could not place a building inside the zone after 100 attempts");
}

}  // namespace detail

/// Composite band value = background + built offset × contrast-weighted
/// covered fraction + N(0, noise_sigma), rounded to i16. Labels are 1 wherever any building
/// touches the pixel. A nodata_fraction of pixels is blanked in every band.
inline SyntheticZone synth_zone(const SceneParams& p, const std::string& zone_id = "A") {
  p.validate();
  if (zone_id.size() > 32) throw ConfigError("zone id longer than 32 bytes");
  Rng rng(derive_seed(p.seed, streams::scene));
  std::normal_distribution<double> unit(0.0, 1.0);

  SyntheticZone z;
  z.zone_id = zone_id;
  z.footprints.aoi_id = zone_id;

  std::vector<detail::HalfRect> rects;
  const double margin = static_cast<double>(p.building_max_px);
  if (2.0 * margin >= static_cast<double>(std::min(p.rows, p.cols))) {
    throw GenerationError("zone too small for the configured building size");
  }
  for (std::size_t k = 0; k < p.clusters; ++k) {
    const double cx = margin + uniform01(rng) * (static_cast<double>(p.cols) - 2 * margin);
    const double cy = margin + uniform01(rng) * (static_cast<double>(p.rows) - 2 * margin);
    for (std::size_t b = 0; b < p.buildings_per_cluster; ++b) {
      rects.push_back(detail::place_building(p, cx, cy, rng, unit));
    }
  }

  // Half-pixel grid of roof contrast (0 = open ground; overlaps keep the max).
  const std::size_t hw = 2 * p.cols, hh = 2 * p.rows;
  std::vector<float> occ(hw * hh, 0.0f);
  const double half = p.pixel_size / 2.0;
  for (const auto& r : rects) {
    for (auto y = r.y0; y < r.y1; ++y)
      for (auto x = r.x0; x < r.x1; ++x) {
        float& cell = occ[static_cast<std::size_t>(y) * hw + static_cast<std::size_t>(x)];
        cell = std::max(cell, static_cast<float>(r.contrast));
      }
    z.footprints.rects.push_back({p.origin_x + static_cast<double>(r.x0) * half,
                                  p.origin_y - static_cast<double>(r.y1) * half,
                                  p.origin_x + static_cast<double>(r.x1) * half,
                                  p.origin_y - static_cast<double>(r.y0) * half});
  }

  auto frame = [&](raster::RasterGrid& g) {
    g.zone_id = zone_id;
    g.origin_x = p.origin_x;
    g.origin_y = p.origin_y;
    g.pixel_size = p.pixel_size;
  };
  z.composite = raster::RasterGrid(p.cols, p.rows, kBands, raster::DType::i16, kCompositeNodata);
  z.labels = raster::RasterGrid(p.cols, p.rows, 1, raster::DType::u8, 255.0);
  frame(z.composite);
  frame(z.labels);

  for (std::size_t r = 0; r < p.rows; ++r) {
    for (std::size_t c = 0; c < p.cols; ++c) {
      const std::size_t i = 2 * r * hw + 2 * c;
      const double q[4] = {occ[i], occ[i + 1], occ[i + hw], occ[i + hw + 1]};
      const double coverage = (q[0] + q[1] + q[2] + q[3]) / 4.0;
      const bool built = q[0] > 0 || q[1] > 0 || q[2] > 0 || q[3] > 0;
      z.labels.at(0, r, c) = built ? 1.0f : 0.0f;
      const bool hole = uniform01(rng) < p.nodata_fraction;
      for (std::size_t b = 0; b < kBands; ++b) {
        const double noise = unit(rng) * p.noise_sigma;
        double v = std::round(p.background[b] + p.built_offset[b] * coverage + noise);
        v = std::clamp(v, -32767.0, 32767.0);
        z.composite.at(b, r, c) = hole ? static_cast<float>(kCompositeNodata) : static_cast<float>(v);
      }
    }
  }

  z.tiles = raster::tile_grid({p.rows, p.cols}, p.tile_pixels);
  return z;
}

/// Two independent draws of one generative process (for far-range transfer).
inline std::pair<SyntheticZone, SyntheticZone> synth_twin_zones(const SceneParams& p,
                                                                std::uint64_t seed_a,
                                                                std::uint64_t seed_b,
                                                                const std::string& id_a = "A",
                                                                const std::string& id_b = "B") {
  SceneParams a = p, b = p;
  a.seed = seed_a;
  b.seed = seed_b;
  return {synth_zone(a, id_a), synth_zone(b, id_b)};
}

}  // namespace ghs::synth
