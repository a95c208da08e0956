#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghs/error.hpp"
#include "ghs/raster/grid.hpp"

namespace ghs::eval {

/// Axis-aligned building footprint in map metres, half-open [x0,x1)×[y0,y1).
struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool operator==(const Rect&) const = default;
};

struct FootprintSet {
  std::string aoi_id;
  std::vector<Rect> rects;

  void validate() const {
    for (std::size_t i = 0; i < rects.size(); ++i) {
      const auto& r = rects[i];
      if (!(r.x1 > r.x0 && r.y1 > r.y0)) {
        throw ShapeError("footprint " + std::to_string(i) + " has non-positive extent");
      }
    }
  }
};

inline nlohmann::json to_json(const FootprintSet& f) {
  nlohmann::json rects = nlohmann::json::array();
  for (const auto& r : f.rects) rects.push_back({r.x0, r.y0, r.x1, r.y1});
  return {{"aoi_id", f.aoi_id}, {"rectangles", rects}};
}

inline FootprintSet footprints_from_json(const nlohmann::json& j) {
  FootprintSet f;
  f.aoi_id = j.at("aoi_id").get<std::string>();
  for (const auto& r : j.at("rectangles")) {
    f.rects.push_back({r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(),
                       r.at(3).get<double>()});
  }
  f.validate();
  return f;
}

/// North-up grid frame: column c spans x in [origin_x + c·size, +size) and
/// row r spans y in (origin_y − (r+1)·size, origin_y − r·size].
struct GridFrame {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_size = 10.0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  static GridFrame of(const raster::RasterGrid& g) {
    return {g.origin_x, g.origin_y, g.pixel_size, g.height, g.width};
  }
};

struct DensityResult {
  std::vector<double> density;       // rows×cols, covered fraction of each cell
  raster::ValidityMask reference;    // density > 0 (stored as 0/1 "valid" flags)
  std::size_t rows = 0, cols = 0;
  std::vector<std::string> warnings;

  double at(std::size_t r, std::size_t c) const { return density[r * cols + c]; }
  bool built_up(std::size_t r, std::size_t c) const { return reference(r, c); }
};

/// Rasterizes rectangles on a fine grid (a fine cell is covered when its
/// centre lies inside any rectangle) and averages each factor×factor block,
/// factor = coarse_res / fine_res. Rectangles reaching outside the extent
/// are clipped and reported as warnings.
inline DensityResult rasterize_density(const FootprintSet& footprints, const GridFrame& extent,
                                       double fine_res = 1.0, double coarse_res = 10.0) {
  footprints.validate();
  if (!(fine_res > 0.0 && coarse_res >= fine_res)) {
    throw ConfigError("need 0 < fine_res <= coarse_res");
  }
  const double ratio = coarse_res / fine_res;
  const auto factor = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(factor)) > 1e-9) {
    throw ConfigError("coarse_res must be an integer multiple of fine_res");
  }
  if (std::abs(extent.pixel_size - coarse_res) > 1e-9) {
    throw ConfigError("extent pixel size does not match coarse_res");
  }
  const std::size_t fine_cols = extent.cols * factor;
  const std::size_t fine_rows = extent.rows * factor;

  DensityResult out;
  out.rows = extent.rows;
  out.cols = extent.cols;
  out.density.assign(extent.rows * extent.cols, 0.0);
  out.reference = raster::ValidityMask(extent.cols, extent.rows, false);

  // Fine cell index range whose centres fall in [lo, hi) measured from the
  // frame edge, clipped to [0, n).
  auto centre_range = [&](double lo, double hi, std::size_t n) {
    const double a = std::ceil(lo / fine_res - 0.5);
    const double b = std::ceil(hi / fine_res - 0.5);
    const auto clip = [n](double v) {
      return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n)));
    };
    return std::pair(clip(a), clip(b));
  };

  struct Span {
    std::size_t r0, r1, c0, c1;
  };
  std::vector<std::vector<Span>> by_coarse_row(extent.rows);
  const double width_m = static_cast<double>(extent.cols) * coarse_res;
  const double height_m = static_cast<double>(extent.rows) * coarse_res;
  for (std::size_t i = 0; i < footprints.rects.size(); ++i) {
    const auto& r = footprints.rects[i];
    const double x_lo = r.x0 - extent.origin_x, x_hi = r.x1 - extent.origin_x;
    // rows grow southwards: distance below the top edge
    const double y_lo = extent.origin_y - r.y1, y_hi = extent.origin_y - r.y0;
    if (x_lo < 0 || y_lo < 0 || x_hi > width_m || y_hi > height_m) {
      out.warnings.push_back("footprint " + std::to_string(i) + " clipped to extent");
    }
    const auto [c0, c1] = centre_range(x_lo, x_hi, fine_cols);
    // y is half-open at the top edge in map space; as a southward distance
    // the covered centres are those with d in (y_lo, y_hi].
    const double a = std::floor(y_lo / fine_res - 0.5) + 1.0;
    const double b = std::floor(y_hi / fine_res - 0.5) + 1.0;
    const auto clip = [n = fine_rows](double v) {
      return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n)));
    };
    const std::size_t r0 = clip(a), r1 = clip(b);
    if (r0 >= r1 || c0 >= c1) continue;
    for (std::size_t cr = r0 / factor; cr <= (r1 - 1) / factor; ++cr) {
      by_coarse_row[cr].push_back({r0, r1, c0, c1});
    }
  }

  std::vector<std::uint8_t> strip(factor * fine_cols);
  for (std::size_t cr = 0; cr < extent.rows; ++cr) {
    if (by_coarse_row[cr].empty()) continue;
    std::fill(strip.begin(), strip.end(), 0);
    const std::size_t base = cr * factor;
    for (const auto& s : by_coarse_row[cr]) {
      const std::size_t lo = std::max(s.r0, base), hi = std::min(s.r1, base + factor);
      for (std::size_t fr = lo; fr < hi; ++fr)
        std::fill(strip.begin() + static_cast<std::ptrdiff_t>((fr - base) * fine_cols + s.c0),
                  strip.begin() + static_cast<std::ptrdiff_t>((fr - base) * fine_cols + s.c1), 1);
    }
    for (std::size_t cc = 0; cc < extent.cols; ++cc) {
      std::size_t covered = 0;
      for (std::size_t i = 0; i < factor; ++i)
        for (std::size_t j = 0; j < factor; ++j) covered += strip[i * fine_cols + cc * factor + j];
      const double d = static_cast<double>(covered) / static_cast<double>(factor * factor);
      out.density[cr * extent.cols + cc] = d;
      out.reference.set(cr, cc, covered > 0);
    }
  }
  return out;
}

}  // namespace ghs::eval
