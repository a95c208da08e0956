#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "ghs/error.hpp"
#include "ghs/nn/tensor.hpp"
#include "ghs/raster/grid.hpp"
#include "ghs/raster/ops.hpp"
#include "ghs/raster/tiles.hpp"
#include "ghs/sampling/samples.hpp"

namespace ghs::pipeline {

inline constexpr std::size_t kPatchSize = 5;

/// Rescaled zone in pixel-interleaved layout, padded by two pixels of zeros
/// at the zone boundary only. Tiles cut from it see their true neighbours
/// across tile seams, so predictions do not depend on how the zone is tiled.
struct ZoneMosaic {
  static constexpr std::size_t margin = kPatchSize / 2;

  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t bands = 0;
  std::vector<float> padded;  // [(rows+4)][(cols+4)][bands]
  raster::ValidityMask valid;

  std::size_t row_stride() const { return (cols + 2 * margin) * bands; }

  /// Copies the 5×5×bands patch centred on zone pixel (row, col) into dst.
  void gather(std::size_t row, std::size_t col, float* dst) const {
    const std::size_t run = kPatchSize * bands;
    const float* src = padded.data() + row * row_stride() + col * bands;
    for (std::size_t i = 0; i < kPatchSize; ++i) {
      std::copy_n(src + i * row_stride(), run, dst + i * run);
    }
  }

  nn::Batch<float> gather_batch(const std::vector<std::pair<std::size_t, std::size_t>>& centres) const {
    nn::Batch<float> b(centres.size(), kPatchSize, kPatchSize, bands);
    for (std::size_t k = 0; k < centres.size(); ++k) {
      gather(centres[k].first, centres[k].second, b.sample(k).data());
    }
    return b;
  }
};

inline ZoneMosaic make_mosaic(const raster::RescaledGrid& rescaled) {
  const auto& g = rescaled.grid;
  ZoneMosaic m;
  m.rows = g.height;
  m.cols = g.width;
  m.bands = g.bands;
  m.valid = rescaled.valid;
  m.padded.assign((m.rows + 2 * ZoneMosaic::margin) * m.row_stride(), 0.0f);
  for (std::size_t b = 0; b < g.bands; ++b)
    for (std::size_t r = 0; r < g.height; ++r)
      for (std::size_t c = 0; c < g.width; ++c) {
        m.padded[(r + ZoneMosaic::margin) * m.row_stride() + (c + ZoneMosaic::margin) * m.bands + b] =
            g.at(b, r, c);
      }
  return m;
}

/// Everything training and prediction need for one zone.
struct ZoneInputs {
  std::string zone_id;
  ZoneMosaic mosaic;
  raster::RasterGrid labels;
  std::vector<raster::TileIndex> tiles;
};

/// Rescales the i16 composite, builds the mosaic and annotates the tiles
/// with their valid-pixel counts.
inline ZoneInputs prepare_zone(const std::string& zone_id, const raster::RasterGrid& composite,
                               const raster::RasterGrid& labels, std::size_t tile_pixels,
                               double divisor) {
  if (composite.width != labels.width || composite.height != labels.height) {
    throw ShapeError("composite and labels of zone " + zone_id + " are not co-registered");
  }
  ZoneInputs z;
  z.zone_id = zone_id;
  z.mosaic = make_mosaic(raster::rescale_reflectance(composite, divisor));
  z.labels = labels;
  z.tiles = raster::tile_grid({composite.height, composite.width}, tile_pixels);
  sampling::annotate_tiles(z.tiles, z.mosaic.valid);
  return z;
}

}  // namespace ghs::pipeline
