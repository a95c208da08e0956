#pragma once

#include <atomic>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ghs/error.hpp"
#include "ghs/model/network.hpp"
#include "ghs/pipeline/zone.hpp"
#include "ghs/raster/grid.hpp"
#include "ghs/raster/ops.hpp"

namespace ghs::pipeline {

inline constexpr std::size_t kInferenceBatch = 4096;

struct ProbabilityTile {
  raster::TileIndex tile;
  std::vector<float> probability;  // rows×cols, 0 where invalid
  raster::ValidityMask valid;

  float at(std::size_t r, std::size_t c) const { return probability[r * tile.cols + c]; }

  /// Single-band f32 raster with nodata -1, georeferenced from `frame`.
  raster::RasterGrid to_raster(const raster::RasterGrid& frame) const {
    raster::RasterGrid g = frame.like(tile.cols, tile.rows, 1, raster::DType::f32);
    g.nodata = -1.0;
    g.origin_x = frame.origin_x + static_cast<double>(tile.col0) * frame.pixel_size;
    g.origin_y = frame.origin_y - static_cast<double>(tile.row0) * frame.pixel_size;
    for (std::size_t i = 0; i < probability.size(); ++i) {
      g.data[i] = valid.valid[i] ? probability[i] : -1.0f;
    }
    return g;
  }
};

inline void check_model_bands(const ModelParameters& model, std::size_t bands) {
  if (model.arch.bands != bands) {
    throw ConfigError("model expects " + std::to_string(model.arch.bands) +
                      " bands but the raster has " + std::to_string(bands));
  }
}

/// Probability for every valid pixel of `window`, computed from 5×5
/// patches of the zone mosaic in infer mode.
inline ProbabilityTile predict_window(const ModelParameters& model, const ZoneMosaic& mosaic,
                                      const raster::TileIndex& window,
                                      std::size_t batch_size = kInferenceBatch) {
  check_model_bands(model, mosaic.bands);
  if (window.row0 + window.rows > mosaic.rows || window.col0 + window.cols > mosaic.cols) {
    throw ShapeError("tile " + window.name() + " lies outside the zone mosaic");
  }
  ProbabilityTile out;
  out.tile = window;
  out.probability.assign(window.pixels(), 0.0f);
  out.valid = raster::ValidityMask(window.cols, window.rows, false);

  std::vector<std::pair<std::size_t, std::size_t>> centres;
  std::vector<std::size_t> slots;
  auto flush = [&] {
    if (centres.empty()) return;
    const auto probs =
        forward_batch(model, mosaic.gather_batch(centres), nn::Mode::infer);
    for (std::size_t k = 0; k < slots.size(); ++k) {
      out.probability[slots[k]] = probs[k];
      out.valid.valid[slots[k]] = 1;
    }
    centres.clear();
    slots.clear();
  };
  for (std::size_t r = 0; r < window.rows; ++r) {
    for (std::size_t c = 0; c < window.cols; ++c) {
      const std::size_t zr = window.row0 + r, zc = window.col0 + c;
      if (!mosaic.valid(zr, zc)) continue;
      centres.emplace_back(zr, zc);
      slots.push_back(r * window.cols + c);
      if (centres.size() == batch_size) flush();
    }
  }
  flush();
  return out;
}

/// Stand-alone tile: constant-zero padding on all four sides.
inline ProbabilityTile predict_tile(const ModelParameters& model, const raster::RescaledGrid& tile) {
  check_model_bands(model, tile.grid.bands);
  const auto mosaic = make_mosaic(tile);
  raster::TileIndex whole;
  whole.rows = tile.grid.height;
  whole.cols = tile.grid.width;
  whole.valid_pixels = tile.valid.count();
  return predict_window(model, mosaic, whole);
}

struct TileOutcome {
  raster::TileIndex tile;
  std::optional<ProbabilityTile> result;
  std::string error;

  bool ok() const { return result.has_value(); }
};

/// Predicts every tile with `workers` threads sharing the read-only model.
/// Each tile is computed by exactly one worker with the same batching as a
/// serial run, so outputs do not depend on the worker count. Failures are
/// captured per tile.
inline std::vector<TileOutcome> predict_zone(const ModelParameters& model, const ZoneMosaic& mosaic,
                                             const std::vector<raster::TileIndex>& tiles,
                                             unsigned workers = 1) {
  std::vector<TileOutcome> out(tiles.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tiles.size(); i = next++) {
      out[i].tile = tiles[i];
      try {
        out[i].result = predict_window(model, mosaic, tiles[i]);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(tiles.size())));
  if (workers == 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return out;
}

/// Zone-sized probability surface from tile outcomes; pixels of failed or
/// missing tiles stay invalid.
struct ZoneProbability {
  std::size_t rows = 0, cols = 0;
  std::vector<float> probability;
  raster::ValidityMask valid;
};

inline ZoneProbability assemble_zone(const std::vector<TileOutcome>& outcomes, std::size_t rows,
                                     std::size_t cols) {
  ZoneProbability z{rows, cols, std::vector<float>(rows * cols, 0.0f),
                    raster::ValidityMask(cols, rows, false)};
  for (const auto& o : outcomes) {
    if (!o.ok()) continue;
    const auto& t = o.result->tile;
    for (std::size_t r = 0; r < t.rows; ++r)
      for (std::size_t c = 0; c < t.cols; ++c) {
        const std::size_t i = (t.row0 + r) * cols + t.col0 + c;
        z.probability[i] = o.result->at(r, c);
        z.valid.valid[i] = o.result->valid(r, c);
      }
  }
  return z;
}

}  // namespace ghs::pipeline
