#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ghs/error.hpp"

namespace ghs::raster {

enum class DType : std::uint8_t { u8 = 1, i16 = 2, f32 = 3 };

inline const char* to_string(DType d) {
  switch (d) {
    case DType::u8: return "u8";
    case DType::i16: return "i16";
    case DType::f32: return "f32";
  }
  return "?";
}

inline std::size_t dtype_size(DType d) {
  switch (d) {
    case DType::u8: return 1;
    case DType::i16: return 2;
    case DType::f32: return 4;
  }
  throw ConfigError("unknown dtype");
}

/// True when `v` is exactly storable in `d` (NaN is allowed only for f32).
inline bool representable(double v, DType d) {
  switch (d) {
    case DType::u8: return v >= 0 && v <= 255 && std::floor(v) == v;
    case DType::i16: return v >= -32768 && v <= 32767 && std::floor(v) == v;
    case DType::f32:
      return std::isnan(v) || std::isinf(v) || static_cast<double>(static_cast<float>(v)) == v;
  }
  return false;
}

/// Multi-band raster. Samples are band-sequential, row-major, held as float
/// (exact for every u8/i16 value) and narrowed to `dtype` on write.
struct RasterGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t bands = 0;
  DType dtype = DType::f32;
  double nodata = 0.0;
  std::string zone_id;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_size = 10.0;
  std::vector<float> data;

  RasterGrid() = default;
  RasterGrid(std::size_t w, std::size_t h, std::size_t b, DType d, double nodata_value = 0.0,
             float fill = 0.0f)
      : width(w), height(h), bands(b), dtype(d), nodata(nodata_value), data(w * h * b, fill) {}

  std::size_t pixels() const { return width * height; }
  std::size_t index(std::size_t band, std::size_t row, std::size_t col) const {
    return (band * height + row) * width + col;
  }
  float& at(std::size_t band, std::size_t row, std::size_t col) {
    return data[index(band, row, col)];
  }
  float at(std::size_t band, std::size_t row, std::size_t col) const {
    return data[index(band, row, col)];
  }

  bool is_nodata(float v) const {
    return std::isnan(nodata) ? std::isnan(v) : static_cast<double>(v) == nodata;
  }

  /// Pixel is nodata when any band carries the nodata value.
  bool pixel_is_nodata(std::size_t row, std::size_t col) const {
    for (std::size_t b = 0; b < bands; ++b)
      if (is_nodata(at(b, row, col))) return true;
    return false;
  }

  /// Copies header fields (georeference, zone, nodata) but no samples.
  RasterGrid like(std::size_t w, std::size_t h, std::size_t b, DType d) const {
    RasterGrid g(w, h, b, d, nodata);
    g.zone_id = zone_id;
    g.origin_x = origin_x;
    g.origin_y = origin_y;
    g.pixel_size = pixel_size;
    return g;
  }

  void validate() const {
    if (data.size() != bands * height * width) {
      throw ShapeError("raster data length " + std::to_string(data.size()) +
                       " != bands*height*width " + std::to_string(bands * height * width));
    }
    if (!representable(nodata, dtype)) {
      throw ConfigError("nodata value " + std::to_string(nodata) + " not representable as " +
                        to_string(dtype));
    }
    if (zone_id.size() > 32) throw ConfigError("zone_id longer than 32 bytes");
    if (bands > 255) throw ConfigError("at most 255 bands supported");
  }

  bool operator==(const RasterGrid& o) const {
    if (width != o.width || height != o.height || bands != o.bands || dtype != o.dtype ||
        zone_id != o.zone_id || origin_x != o.origin_x || origin_y != o.origin_y ||
        pixel_size != o.pixel_size)
      return false;
    if (!(nodata == o.nodata || (std::isnan(nodata) && std::isnan(o.nodata)))) return false;
    if (data.size() != o.data.size()) return false;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!(data[i] == o.data[i] || (std::isnan(data[i]) && std::isnan(o.data[i])))) return false;
    }
    return true;
  }
};

/// Per-pixel validity, row-major; 1 = valid.
struct ValidityMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> valid;

  ValidityMask() = default;
  ValidityMask(std::size_t w, std::size_t h, bool fill = true)
      : width(w), height(h), valid(w * h, fill ? 1 : 0) {}

  bool operator()(std::size_t row, std::size_t col) const { return valid[row * width + col] != 0; }
  void set(std::size_t row, std::size_t col, bool v) { valid[row * width + col] = v ? 1 : 0; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : valid) n += v != 0;
    return n;
  }
  bool operator==(const ValidityMask&) const = default;
};

inline ValidityMask validity_of(const RasterGrid& g) {
  ValidityMask m(g.width, g.height);
  for (std::size_t r = 0; r < g.height; ++r)
    for (std::size_t c = 0; c < g.width; ++c) m.set(r, c, !g.pixel_is_nodata(r, c));
  return m;
}

}  // namespace ghs::raster
