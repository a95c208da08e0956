#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ghs/error.hpp"

namespace ghs::raster {

struct Extent {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Pixel window of one tile inside its zone.
struct TileIndex {
  std::size_t tile_row = 0;
  std::size_t tile_col = 0;
  std::size_t row0 = 0;
  std::size_t col0 = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool water_dominated = false;
  std::size_t valid_pixels = 0;

  std::string name() const {
    return "r" + std::to_string(tile_row) + "_c" + std::to_string(tile_col);
  }
  std::size_t pixels() const { return rows * cols; }
  bool contains(std::size_t r, std::size_t c) const {
    return r >= row0 && r < row0 + rows && c >= col0 && c < col0 + cols;
  }
  bool operator==(const TileIndex&) const = default;
};

/// Row-major tiling; the last row/column of tiles absorbs the remainder.
inline std::vector<TileIndex> tile_grid(Extent zone, std::size_t tile_pixels,
                                        std::size_t min_tile = 5) {
  if (tile_pixels < min_tile) {
    throw ConfigError("tile size " + std::to_string(tile_pixels) + " smaller than patch size " +
                      std::to_string(min_tile));
  }
  std::vector<TileIndex> tiles;
  for (std::size_t tr = 0, r0 = 0; r0 < zone.rows; ++tr, r0 += tile_pixels) {
    for (std::size_t tc = 0, c0 = 0; c0 < zone.cols; ++tc, c0 += tile_pixels) {
      TileIndex t;
      t.tile_row = tr;
      t.tile_col = tc;
      t.row0 = r0;
      t.col0 = c0;
      t.rows = std::min(tile_pixels, zone.rows - r0);
      t.cols = std::min(tile_pixels, zone.cols - c0);
      t.valid_pixels = t.pixels();
      tiles.push_back(t);
    }
  }
  return tiles;
}

/// Metres → pixels along one side; e.g. 100 km at 10 m is 10,000 pixels.
inline std::size_t tile_pixels_for(double tile_metres, double pixel_size) {
  if (!(pixel_size > 0.0)) throw ConfigError("pixel size must be positive");
  return static_cast<std::size_t>(tile_metres / pixel_size + 0.5);
}

}  // namespace ghs::raster
