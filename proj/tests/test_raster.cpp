#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "support.hpp"

using namespace ghs;
using namespace ghs::raster;

namespace {

RasterGrid counting_grid(std::size_t w, std::size_t h, std::size_t b, DType d) {
  RasterGrid g(w, h, b, d, 0.0);
  for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] = static_cast<float>(i % 200 + 1);
  g.zone_id = "T1";
  g.origin_x = 500000.0;
  g.origin_y = 4200000.0;
  return g;
}

}  // namespace

TEST(RasterIo, HeaderSizeAndLayout) {
  const auto g = counting_grid(4, 4, 3, DType::u8);
  const auto bytes = encode_raster(g);
  EXPECT_EQ(bytes.size(), 128u);
  EXPECT_EQ(kRasterHeaderSize, 80u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "GHSR");
  EXPECT_EQ(bytes[6], 1);  // dtype
  EXPECT_EQ(bytes[7], 3);  // bands
  EXPECT_EQ(bytes[8], 4);  // width, little-endian
  EXPECT_EQ(bytes[48], 'T');
  EXPECT_EQ(bytes[80], 1);  // first sample
}

TEST(RasterIo, RoundTripAllTypes) {
  for (auto d : {DType::u8, DType::i16, DType::f32}) {
    auto g = counting_grid(7, 3, 2, d);
    if (d == DType::i16) g.data[5] = -1234.0f;
    if (d == DType::f32) {
      g.data[5] = 0.125f;
      g.nodata = std::nan("");
      g.data[6] = std::nanf("");
    }
    const auto back = decode_raster(encode_raster(g));
    EXPECT_TRUE(back == g) << to_string(d);
    EXPECT_EQ(encode_raster(back), encode_raster(g));
  }
}

TEST(RasterIo, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "ghs_test_raster";
  std::filesystem::create_directories(dir);
  const auto g = counting_grid(5, 6, 4, DType::i16);
  write_raster(g, (dir / "a.ghsr").string());
  EXPECT_TRUE(read_raster((dir / "a.ghsr").string()) == g);
  EXPECT_THROW(read_raster((dir / "missing.ghsr").string()), IoError);
  std::filesystem::remove_all(dir);
}

TEST(RasterIo, RejectsMalformed) {
  const auto bytes = encode_raster(counting_grid(4, 4, 1, DType::f32));
  auto bad = bytes;
  bad[1] = 'X';
  EXPECT_THROW(decode_raster(bad), FormatError);
  auto ver = bytes;
  ver[4] = 9;
  EXPECT_THROW(decode_raster(ver), FormatError);
  auto dt = bytes;
  dt[6] = 7;
  EXPECT_THROW(decode_raster(dt), FormatError);
  auto cut = bytes;
  cut.resize(90);
  EXPECT_THROW(decode_raster(cut), FormatError);
  auto header_cut = bytes;
  header_cut.resize(40);
  try {
    decode_raster(header_cut);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 40u);
  }
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_THROW(decode_raster(extra), FormatError);
}

TEST(RasterIo, RejectsUnrepresentableOnWrite) {
  auto g = counting_grid(2, 2, 1, DType::u8);
  g.data[0] = 300.0f;
  EXPECT_THROW(encode_raster(g), ConfigError);
  g.data[0] = 1.5f;
  EXPECT_THROW(encode_raster(g), ConfigError);
  auto s = counting_grid(2, 2, 1, DType::u8);
  s.data.pop_back();
  EXPECT_THROW(encode_raster(s), ShapeError);
  auto n = counting_grid(2, 2, 1, DType::u8);
  n.nodata = -1.0;
  EXPECT_THROW(encode_raster(n), ConfigError);
}

TEST(RasterOps, RescaleClampsAndMasks) {
  RasterGrid g(3, 1, 2, DType::i16, -32768.0);
  g.at(0, 0, 0) = 5000;
  g.at(1, 0, 0) = 20000;
  g.at(0, 0, 1) = -32768;
  g.at(1, 0, 1) = 100;
  g.at(0, 0, 2) = -50;
  g.at(1, 0, 2) = 10000;
  const auto r = rescale_reflectance(g, 10000.0);
  EXPECT_FLOAT_EQ(r.grid.at(0, 0, 0), 0.5f);
  EXPECT_FLOAT_EQ(r.grid.at(1, 0, 0), 1.0f);
  EXPECT_FALSE(r.valid(0, 1));
  EXPECT_EQ(r.grid.at(1, 0, 1), 0.0f);
  EXPECT_FLOAT_EQ(r.grid.at(0, 0, 2), 0.0f);
  EXPECT_TRUE(r.valid(0, 2));
  EXPECT_THROW(rescale_reflectance(g, 0.0), ConfigError);
}

TEST(RasterOps, PadPreservesGeoreference) {
  auto g = counting_grid(3, 2, 2, DType::f32);
  const auto p = pad_constant(g, 2, -7.0f);
  EXPECT_EQ(p.width, 7u);
  EXPECT_EQ(p.height, 6u);
  EXPECT_DOUBLE_EQ(p.origin_x, g.origin_x - 20.0);
  EXPECT_DOUBLE_EQ(p.origin_y, g.origin_y + 20.0);
  EXPECT_EQ(p.at(1, 0, 0), -7.0f);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(p.at(b, r + 2, c + 2), g.at(b, r, c));
}

TEST(RasterOps, PatchStreamCentersEveryPixel) {
  auto g = counting_grid(6, 4, 2, DType::f32);
  const auto padded = pad_constant(g, 2, 0.0f);
  PatchStream s(padded);
  EXPECT_EQ(s.count(), 24u);
  std::size_t n = 0;
  while (auto p = s.next()) {
    EXPECT_EQ(p->row, n / 6);
    EXPECT_EQ(p->col, n % 6);
    for (std::size_t b = 0; b < 2; ++b) EXPECT_EQ(p->values(2, 2, b), g.at(b, p->row, p->col));
    ++n;
  }
  EXPECT_EQ(n, 24u);
  const auto q = s.at(0, 0);
  EXPECT_EQ(q.values(0, 0, 0), 0.0f);
  EXPECT_EQ(q.values(3, 4, 1), g.at(1, 1, 2));
  EXPECT_THROW(PatchStream(padded, 4), ShapeError);
  EXPECT_THROW(PatchStream(g, 5), ShapeError);
}

TEST(RasterOps, QuantizeRoundTrip) {
  RasterGrid p(4, 1, 1, DType::f32);
  p.data = {0.0f, 0.494f, 0.506f, 1.0f};
  ValidityMask m(4, 1);
  m.set(0, 3, false);
  const auto q = quantize_probability(p, m);
  EXPECT_EQ(q.dtype, DType::u8);
  EXPECT_EQ(q.data, (std::vector<float>{0.0f, 49.0f, 51.0f, 255.0f}));
  const auto [back, valid] = dequantize_probability(q);
  EXPECT_EQ(valid, m);
  EXPECT_FLOAT_EQ(back.at(0, 0, 1), 0.49f);
  p.data[0] = 1.5f;
  EXPECT_THROW(quantize_probability(p, m), NumericError);
}

TEST(Tiles, GridCoversZoneExactlyOnce) {
  const Extent z{23, 17};
  const auto tiles = tile_grid(z, 8);
  EXPECT_EQ(tiles.size(), 9u);
  std::vector<int> hits(23 * 17, 0);
  std::set<std::string> names;
  for (const auto& t : tiles) {
    names.insert(t.name());
    for (std::size_t r = t.row0; r < t.row0 + t.rows; ++r)
      for (std::size_t c = t.col0; c < t.col0 + t.cols; ++c) ++hits[r * 17 + c];
  }
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_EQ(names.size(), tiles.size());
  EXPECT_EQ(tiles.back().rows, 7u);
  EXPECT_EQ(tiles.back().cols, 1u);
  EXPECT_THROW(tile_grid(z, 4), ConfigError);
}

TEST(Tiles, MetresToPixels) {
  EXPECT_EQ(tile_pixels_for(100000.0, 10.0), 10000u);
  EXPECT_THROW(tile_pixels_for(1000.0, 0.0), ConfigError);
}
