#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "support.hpp"

using namespace ghs;
using namespace ghs::sampling;
using raster::DType;
using raster::RasterGrid;

namespace {

RasterGrid label_grid(std::size_t w, std::size_t h, float fill = 0.0f) {
  return RasterGrid(w, h, 1, DType::u8, 255.0, fill);
}

// Brute-force built-up test: any labelled pixel inside the clipped 5×5 window.
bool block_has_built_up(const RasterGrid& labels, std::size_t r, std::size_t c) {
  for (long dr = -2; dr <= 2; ++dr)
    for (long dc = -2; dc <= 2; ++dc) {
      const long rr = static_cast<long>(r) + dr, cc = static_cast<long>(c) + dc;
      if (rr < 0 || cc < 0 || rr >= static_cast<long>(labels.height) ||
          cc >= static_cast<long>(labels.width))
        continue;
      if (labels.at(0, static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) == 1.0f) return true;
    }
  return false;
}

}  // namespace

TEST(CompositeLabels, PriorityAndFallback) {
  auto hi = label_grid(3, 1, 255.0f);
  auto lo = label_grid(3, 1, 1.0f);
  hi.data = {0.0f, 255.0f, 1.0f};
  lo.data = {1.0f, 1.0f, 255.0f};
  const auto out = composite_labels({{lo, 2, "lo"}, {hi, 1, "hi"}});
  EXPECT_EQ(out.data, (std::vector<float>{0.0f, 1.0f, 1.0f}));
  const auto none = composite_labels({{label_grid(2, 1, 255.0f), 1, "x"}});
  EXPECT_EQ(none.data, (std::vector<float>{255.0f, 255.0f}));
}

TEST(CompositeLabels, SingleSourceIdentityAndIdempotent) {
  auto a = label_grid(4, 2);
  a.data = {0, 1, 255, 1, 0, 0, 1, 255};
  const auto once = composite_labels({{a, 1, "a"}});
  EXPECT_EQ(once.data, a.data);
  EXPECT_EQ(composite_labels({{once, 1, "a"}}).data, once.data);
}

TEST(CompositeLabels, OrderIndependent) {
  auto a = label_grid(3, 1), b = label_grid(3, 1), c = label_grid(3, 1);
  a.data = {255, 0, 255};
  b.data = {1, 1, 255};
  c.data = {0, 1, 1};
  const auto x = composite_labels({{a, 1, "a"}, {b, 2, "b"}, {c, 3, "c"}});
  const auto y = composite_labels({{c, 3, "c"}, {a, 1, "a"}, {b, 2, "b"}});
  EXPECT_EQ(x.data, y.data);
  EXPECT_EQ(x.data, (std::vector<float>{1, 0, 1}));
}

TEST(CompositeLabels, Errors) {
  EXPECT_THROW(composite_labels({}), ShapeError);
  EXPECT_THROW(composite_labels({{label_grid(2, 2), 1, "a"}, {label_grid(3, 2), 2, "b"}}), ShapeError);
  auto bad = label_grid(2, 1);
  bad.data[0] = 2.0f;
  EXPECT_THROW(composite_labels({{bad, 1, "bad"}}), ShapeError);
}

TEST(TileSelection, CheckerboardFourByFour) {
  const auto tiles = raster::tile_grid({40, 40}, 10);
  const auto sel = select_training_tiles(tiles, 0.5, false);
  ASSERT_EQ(sel.size(), 8u);
  for (const auto& t : sel) EXPECT_EQ((t.tile_row + t.tile_col) % 2, 0u);
}

TEST(TileSelection, HalfCountAndNoAdjacentNeighboursInRow) {
  for (std::size_t rows = 1; rows <= 6; ++rows)
    for (std::size_t cols = 1; cols <= 6; ++cols) {
      const auto tiles = raster::tile_grid({rows * 8, cols * 8}, 8);
      const auto sel = select_training_tiles(tiles, 0.5, false);
      const std::size_t n = tiles.size();
      EXPECT_TRUE(sel.size() == n / 2 || sel.size() == (n + 1) / 2) << rows << "x" << cols;
      std::set<std::pair<std::size_t, std::size_t>> picked;
      for (const auto& t : sel) picked.insert({t.tile_row, t.tile_col});
      for (const auto& [r, c] : picked) EXPECT_FALSE(picked.count({r, c + 1})) << rows << "x" << cols;
    }
}

TEST(TileSelection, SingleTileAndFractionRules) {
  const auto one = raster::tile_grid({10, 10}, 10);
  EXPECT_EQ(select_training_tiles(one, 0.01, false).size(), 1u);
  const auto tiles = raster::tile_grid({30, 30}, 10);
  EXPECT_EQ(select_training_tiles(tiles, 1.0, false).size(), 9u);
  EXPECT_EQ(select_training_tiles(tiles, 0.2, false).size(), 2u);
  EXPECT_THROW(select_training_tiles(tiles, 0.0, false), ConfigError);
  EXPECT_THROW(select_training_tiles(tiles, 1.5, false), ConfigError);
}

TEST(TileSelection, WaterZoneKeepsAllValidTiles) {
  auto tiles = raster::tile_grid({20, 20}, 10);
  raster::ValidityMask valid(20, 20, false);
  for (std::size_t r = 0; r < 10; ++r) valid.set(r, 3, true);  // a sliver in tile r0_c0
  for (std::size_t c = 10; c < 20; ++c) valid.set(15, c, true);  // and in r1_c1
  annotate_tiles(tiles, valid);
  EXPECT_TRUE(is_water_zone(tiles));
  const auto sel = select_training_tiles(tiles, 0.5, true);
  ASSERT_EQ(sel.size(), 2u);
  EXPECT_EQ(sel[0].name(), "r0_c0");
  EXPECT_EQ(sel[1].name(), "r1_c1");
  EXPECT_EQ(sel[0].valid_pixels, 10u);
}

TEST(SampleSet, BuiltUpBlocksMatchBruteForce) {
  Rng rng(31);
  auto labels = label_grid(23, 17);
  for (auto& v : labels.data) v = uniform01(rng) < 0.03 ? 1.0f : 0.0f;
  const auto blocks = built_up_blocks(labels);
  for (std::size_t r = 0; r < 17; ++r)
    for (std::size_t c = 0; c < 23; ++c)
      EXPECT_EQ(blocks[r * 23 + c] != 0, block_has_built_up(labels, r, c)) << r << "," << c;
}

TEST(SampleSet, CornerPixelMakesPatchBuiltUp) {
  auto labels = label_grid(9, 9);
  labels.at(0, 2, 2) = 1.0f;
  const raster::ValidityMask valid(9, 9);
  const std::vector<raster::TileIndex> tiles = raster::tile_grid({9, 9}, 9);
  Rng rng(1);
  const auto set = build_sample_set(valid, labels, tiles, 0.0, rng);
  // Centre (4,4) sees (2,2) in its window corner; (5,5) does not.
  bool centre = false, beyond = false;
  for (const auto& s : set.samples) {
    if (s.row == 4 && s.col == 4) centre = s.label == 1;
    if (s.row == 5 && s.col == 5) beyond = true;
  }
  EXPECT_TRUE(centre);
  EXPECT_FALSE(beyond);
  EXPECT_EQ(set.built_up, 25u);
  EXPECT_EQ(set.non_built_up, 0u);
}

TEST(SampleSet, FullRecallAndKeepRate) {
  Rng gen(41);
  auto labels = label_grid(160, 160);
  for (auto& v : labels.data) v = uniform01(gen) < 0.002 ? 1.0f : 0.0f;
  raster::ValidityMask valid(160, 160);
  valid.set(7, 9, false);
  labels.at(0, 100, 100) = 255.0f;
  const auto tiles = raster::tile_grid({160, 160}, 80);
  const auto sel = select_training_tiles(tiles, 1.0, false);
  Rng rng(42);
  const auto set = build_sample_set(valid, labels, sel, 0.6, rng, 42);
  const auto blocks = built_up_blocks(labels);
  std::size_t expected_bu = 0;
  for (std::size_t r = 0; r < 160; ++r)
    for (std::size_t c = 0; c < 160; ++c)
      if (valid(r, c) && labels.at(0, r, c) != 255.0f && block_has_built_up(labels, r, c)) ++expected_bu;
  EXPECT_EQ(set.built_up, expected_bu);
  for (const auto& s : set.samples) {
    EXPECT_FALSE(s.row == 7 && s.col == 9);
    EXPECT_FALSE(s.row == 100 && s.col == 100);
    EXPECT_EQ(s.label, blocks[s.row * 160 + s.col]);
  }
  const double n = static_cast<double>(set.non_built_up_candidates);
  ASSERT_GE(n, 1e4);
  const double sigma = std::sqrt(n * 0.6 * 0.4);
  EXPECT_LT(std::abs(static_cast<double>(set.non_built_up) - 0.6 * n), 3.0 * sigma);
  Rng again(42);
  const auto twin = build_sample_set(valid, labels, sel, 0.6, again, 42);
  ASSERT_EQ(twin.size(), set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_EQ(twin.samples[i].row, set.samples[i].row);
    EXPECT_EQ(twin.samples[i].col, set.samples[i].col);
  }
}

TEST(SampleSet, TenBuiltUpNinetyBackground) {
  auto labels = label_grid(100, 5);
  labels.at(0, 2, 2) = 1.0f;  // patches centred on columns 0..9 are built-up
  labels.at(0, 2, 7) = 1.0f;
  const raster::ValidityMask valid(100, 5);
  raster::TileIndex t;
  t.row0 = 2;
  t.rows = 1;
  t.col0 = 0;
  t.cols = 100;
  std::size_t kept = 0;
  const int trials = 200;
  for (int k = 0; k < trials; ++k) {
    Rng rng(1000 + k);
    const auto set = build_sample_set(valid, labels, {t}, 0.6, rng);
    ASSERT_EQ(set.built_up, 10u);
    ASSERT_EQ(set.non_built_up_candidates, 90u);
    kept += set.non_built_up;
  }
  const double mean = static_cast<double>(kept) / trials;
  EXPECT_NEAR(mean, 54.0, 3.0 * std::sqrt(90 * 0.24 / trials));
}

TEST(SampleSet, NoBuiltUpWarns) {
  const auto labels = label_grid(10, 10);
  Rng rng(3);
  const auto set = build_sample_set(raster::ValidityMask(10, 10), labels,
                                    raster::tile_grid({10, 10}, 10), 0.6, rng);
  EXPECT_EQ(set.built_up, 0u);
  EXPECT_FALSE(set.warnings.empty());
  EXPECT_THROW(build_sample_set(raster::ValidityMask(9, 10), labels, {}, 0.6, rng), ShapeError);
  EXPECT_THROW(build_sample_set(raster::ValidityMask(10, 10), labels, {}, 1.5, rng), ConfigError);
}

TEST(ClassStats, Fractions) {
  SampleSet s;
  s.built_up = 10;
  s.non_built_up = 490;
  const auto st = class_stats(s);
  EXPECT_NEAR(st.built_up, 0.02, 1e-12);
  s.non_built_up = 500;
  EXPECT_NEAR(class_stats(s).built_up, 0.0196, 1e-4);
  EXPECT_NEAR(class_stats(s).built_up + class_stats(s).non_built_up, 1.0, 1e-15);
  s.non_built_up = 0;
  EXPECT_EQ(class_stats(s).built_up, 1.0);
  EXPECT_THROW(class_stats(SampleSet{}), StatisticError);
}

TEST(Minibatch, ChunksAndBatches) {
  Rng rng(5);
  const auto b = shuffle_minibatches(500, 200, 100, rng);
  ASSERT_EQ(b.size(), 5u);
  for (const auto& x : b) EXPECT_EQ(x.size(), 100u);
  const auto odd = shuffle_minibatches(450, 200, 150, rng);
  std::vector<std::size_t> sizes;
  for (const auto& x : odd) sizes.push_back(x.size());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{150, 50, 150, 50, 50}));
}

TEST(Minibatch, EpochIsPartition) {
  Rng rng(6);
  const auto e1 = shuffle_minibatches(1234, 300, 64, rng);
  const auto e2 = shuffle_minibatches(1234, 300, 64, rng);
  std::vector<std::size_t> f1, f2;
  for (const auto& x : e1) f1.insert(f1.end(), x.begin(), x.end());
  for (const auto& x : e2) f2.insert(f2.end(), x.begin(), x.end());
  EXPECT_NE(f1, f2);
  std::sort(f1.begin(), f1.end());
  std::sort(f2.begin(), f2.end());
  EXPECT_EQ(f1, f2);
  for (std::size_t i = 0; i < f1.size(); ++i) ASSERT_EQ(f1[i], i);
  EXPECT_THROW(shuffle_minibatches(10, 5, 8, rng), ConfigError);
  EXPECT_THROW(shuffle_minibatches(10, 5, 0, rng), ConfigError);
}
