#pragma once

// GHSR raster container, little-endian throughout.
//
//   offset size field
//        0    4 magic "GHSR"
//        4    2 u16 version (1)
//        6    1 u8 dtype (1=u8, 2=i16, 3=f32)
//        7    1 u8 bands
//        8    4 u32 width
//       12    4 u32 height
//       16    8 f64 nodata
//       24    8 f64 origin_x
//       32    8 f64 origin_y
//       40    8 f64 pixel_size
//       48   32 zone_id, NUL padded
//       80      samples, band-sequential row-major

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ghs/bytes.hpp"
#include "ghs/error.hpp"
#include "ghs/raster/grid.hpp"

namespace ghs::raster {

inline constexpr std::uint16_t kRasterVersion = 1;
inline constexpr std::size_t kRasterHeaderSize = 80;

inline std::vector<unsigned char> encode_raster(const RasterGrid& g) {
  g.validate();
  bytes::Writer w;
  w.put_string("GHSR");
  w.put(kRasterVersion);
  w.put(static_cast<std::uint8_t>(g.dtype));
  w.put(static_cast<std::uint8_t>(g.bands));
  w.put(static_cast<std::uint32_t>(g.width));
  w.put(static_cast<std::uint32_t>(g.height));
  w.put(g.nodata);
  w.put(g.origin_x);
  w.put(g.origin_y);
  w.put(g.pixel_size);
  w.put_fixed(g.zone_id, 32);
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    const float v = g.data[i];
    if (!representable(v, g.dtype)) {
      throw ConfigError("sample " + std::to_string(i) + " value " + std::to_string(v) +
                        " not representable as " + to_string(g.dtype));
    }
    switch (g.dtype) {
      case DType::u8: w.put(static_cast<std::uint8_t>(v)); break;
      case DType::i16: w.put(static_cast<std::int16_t>(v)); break;
      case DType::f32: w.put(v); break;
    }
  }
  return w.take();
}

struct RasterHeader {
  std::uint16_t version = 0;
  DType dtype = DType::u8;
  std::size_t bands = 0, width = 0, height = 0;
  double nodata = 0, origin_x = 0, origin_y = 0, pixel_size = 0;
  std::string zone_id;
};

inline RasterHeader decode_raster_header(bytes::Reader& r) {
  if (r.get_string(4, "magic") != "GHSR") {
    throw FormatError("bad raster magic (expected \"GHSR\")", 0);
  }
  RasterHeader h;
  h.version = r.get<std::uint16_t>("version");
  if (h.version != kRasterVersion) {
    throw FormatError("unsupported raster version " + std::to_string(h.version), 4);
  }
  const auto dt = r.get<std::uint8_t>("dtype");
  if (dt < 1 || dt > 3) throw FormatError("unknown dtype code " + std::to_string(dt), 6);
  h.dtype = static_cast<DType>(dt);
  h.bands = r.get<std::uint8_t>("bands");
  h.width = r.get<std::uint32_t>("width");
  h.height = r.get<std::uint32_t>("height");
  h.nodata = r.get<double>("nodata");
  h.origin_x = r.get<double>("origin_x");
  h.origin_y = r.get<double>("origin_y");
  h.pixel_size = r.get<double>("pixel_size");
  const std::string zone = r.get_string(32, "zone_id");
  h.zone_id = zone.substr(0, zone.find('\0'));
  return h;
}

inline RasterHeader decode_raster_header(std::span<const unsigned char> data) {
  bytes::Reader r(data);
  return decode_raster_header(r);
}

inline RasterGrid decode_raster(std::span<const unsigned char> data) {
  bytes::Reader r(data);
  const auto h = decode_raster_header(r);
  RasterGrid g(h.width, h.height, h.bands, h.dtype, h.nodata);
  g.zone_id = h.zone_id;
  g.origin_x = h.origin_x;
  g.origin_y = h.origin_y;
  g.pixel_size = h.pixel_size;
  const std::size_t need = g.data.size() * dtype_size(h.dtype);
  if (r.remaining() < need) {
    throw FormatError("truncated sample payload: need " + std::to_string(need) + " bytes, have " +
                          std::to_string(r.remaining()),
                      r.position() + r.remaining());
  }
  for (auto& v : g.data) {
    switch (h.dtype) {
      case DType::u8: v = r.get<std::uint8_t>("sample"); break;
      case DType::i16: v = r.get<std::int16_t>("sample"); break;
      case DType::f32: v = r.get<float>("sample"); break;
    }
  }
  if (r.remaining() != 0) {
    throw FormatError("unexpected trailing bytes after samples", r.position());
  }
  return g;
}

inline void write_raster(const RasterGrid& g, const std::string& path) {
  bytes::write_file(path, encode_raster(g));
}

inline RasterGrid read_raster(const std::string& path) {
  return decode_raster(bytes::read_file(path));
}

}  // namespace ghs::raster
