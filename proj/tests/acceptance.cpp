// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--allow-red N[,M...]] [--report FILE]
//
// Exit status is 0 when every criterion passes, or when every failing
// criterion is listed in --allow-red (each still prints FAIL).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ghs/ghs.hpp"

using namespace ghs;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kDivisor = 10000.0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "!") + what);
  }
};

// ---------------------------------------------------------------- helpers

template <typename T>
nn::Batch<T> random_batch(std::size_t n, std::size_t h, std::size_t w, std::size_t c, Rng& rng,
                          double lo = -1.0, double hi = 1.0) {
  nn::Batch<T> b(n, h, w, c);
  for (auto& v : b.data) v = static_cast<T>(lo + (hi - lo) * uniform01(rng));
  return b;
}

void randomize(std::vector<double>& v, Rng& rng, double scale = 0.5) {
  for (auto& x : v) x = scale * (2.0 * uniform01(rng) - 1.0);
}

double weighted(const std::vector<double>& y, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
  return s;
}

ArchitectureConfig tiny_arch() {
  auto a = ArchitectureConfig::desk();
  a.block_filters = {3, 4};
  a.hidden_units = 5;
  return a;
}

// Labels of held-out tiles (complement of the training checkerboard) as a mask.
raster::ValidityMask held_out_mask(const std::vector<raster::TileIndex>& all,
                                   const std::vector<raster::TileIndex>& trained,
                                   const raster::ValidityMask& valid) {
  std::set<std::string> used;
  for (const auto& t : trained) used.insert(t.name());
  raster::ValidityMask m(valid.width, valid.height, false);
  for (const auto& t : all) {
    if (used.count(t.name())) continue;
    for (std::size_t r = t.row0; r < t.row0 + t.rows; ++r)
      for (std::size_t c = t.col0; c < t.col0 + t.cols; ++c) m.set(r, c, valid(r, c));
  }
  return m;
}

struct ZoneTruth {
  std::vector<double> density;
  std::vector<std::uint8_t> reference;
};

ZoneTruth truth_of(const synth::SyntheticZone& z) {
  const auto d = eval::rasterize_density(z.footprints, eval::GridFrame::of(z.labels));
  ZoneTruth t;
  t.density = d.density;
  t.reference.assign(d.reference.valid.begin(), d.reference.valid.end());
  return t;
}

struct TrainedZone {
  synth::SyntheticZone scene;
  pipeline::ZoneInputs inputs;
  pipeline::TrainingResult result;
  double seconds = 0.0;
};

TrainedZone train_default(const synth::SyntheticZone& scene) {
  TrainedZone t;
  t.scene = scene;
  t.inputs = pipeline::prepare_zone(scene.zone_id, scene.composite, scene.labels,
                                    scene.tiles.front().rows, kDivisor);
  pipeline::TrainingConfig cfg;
  cfg.seed = 7;
  const auto t0 = Clock::now();
  t.result = pipeline::train_zone(t.inputs, ArchitectureConfig::desk(), cfg,
                                  [&](const pipeline::EpochReport& r) {
                                    std::fprintf(stderr, "  zone %s epoch %2zu train %.4f val %.4f (%.0f s)\n",
                                                 scene.zone_id.c_str(), r.epoch, r.train_loss,
                                                 r.validation_loss, seconds_since(t0));
                                  });
  t.seconds = seconds_since(t0);
  return t;
}

pipeline::ZoneProbability predict_all(const ModelParameters& model, const pipeline::ZoneInputs& z,
                                      unsigned workers = 1) {
  return pipeline::assemble_zone(pipeline::predict_zone(model, z.mosaic, z.tiles, workers),
                                 z.mosaic.rows, z.mosaic.cols);
}

// ------------------------------------------------------------- criterion 1

Verdict criterion_gradients() {
  Verdict v;
  const auto t0 = Clock::now();
  constexpr int kSeeds = 20;
  constexpr double kTol = 1e-4;
  double conv_w = 0, dense_w = 0, bn_w = 0, drop_w = 0, loss_w = 0, net_w = 0, desk_w = 0;
  for (int s = 1; s <= kSeeds; ++s) {
    Rng rng(derive_seed(1000 + static_cast<std::uint64_t>(s), streams::init));
    for (auto act : {nn::Activation::linear, nn::Activation::tanh}) {
      nn::ConvLayer<double> l(3, 4, act);
      randomize(l.kernel, rng);
      randomize(l.bias, rng);
      auto x = random_batch<double>(2, 4, 4, 3, rng);
      nn::ConvCache<double> cache;
      const auto y = nn::conv2d(x, l, &cache);
      std::vector<double> w(y.data.size());
      randomize(w, rng, 1.0);
      nn::Batch<double> g(y.count, y.height, y.width, y.channels);
      g.data = w;
      nn::ConvGrads<double> grads(l);
      const auto gx = nn::conv2d_backward(l, cache, g, grads);
      auto f = [&] { return weighted(nn::conv2d(x, l).data, w); };
      conv_w = std::max({conv_w, nn::grad_check<double>(f, l.kernel, grads.kernel, 1e-5),
                         nn::grad_check<double>(f, l.bias, grads.bias, 1e-5),
                         nn::grad_check<double>(f, x.data, gx.data, 1e-5)});
    }
    for (auto act : {nn::Activation::tanh, nn::Activation::sigmoid}) {
      nn::DenseLayer<double> l(12, 5, act);
      randomize(l.weights, rng);
      randomize(l.bias, rng);
      auto x = random_batch<double>(3, 2, 2, 3, rng);
      nn::DenseCache<double> cache;
      nn::dense(x, l, &cache);
      std::vector<double> w(15);
      randomize(w, rng, 1.0);
      auto g = nn::Batch<double>::vectors(3, 5);
      g.data = w;
      nn::DenseGrads<double> grads(l);
      const auto gx = nn::dense_backward(l, cache, g, grads);
      auto f = [&] { return weighted(nn::dense(x, l).data, w); };
      dense_w = std::max({dense_w, nn::grad_check<double>(f, l.weights, grads.weights, 1e-5),
                          nn::grad_check<double>(f, l.bias, grads.bias, 1e-5),
                          nn::grad_check<double>(f, x.data, gx.data, 1e-5)});
    }
    {
      nn::BatchNormParams<double> p(3);
      randomize(p.gamma, rng);
      randomize(p.beta, rng);
      auto x = random_batch<double>(4, 2, 1, 3, rng, -1.0, 3.0);
      nn::BatchNormCache<double> cache;
      nn::batch_norm(x, p, nn::Mode::train, &cache);
      std::vector<double> w(x.data.size());
      randomize(w, rng, 1.0);
      nn::Batch<double> g(4, 2, 1, 3);
      g.data = w;
      nn::BatchNormGrads<double> grads(p);
      const auto gx = nn::batch_norm_backward(p, cache, g, grads);
      auto f = [&] { return weighted(nn::batch_norm(x, p, nn::Mode::train).data, w); };
      bn_w = std::max({bn_w, nn::grad_check<double>(f, p.gamma, grads.gamma, 1e-5),
                       nn::grad_check<double>(f, p.beta, grads.beta, 1e-5),
                       nn::grad_check<double>(f, x.data, gx.data, 1e-5)});
    }
    {
      auto x = random_batch<double>(4, 1, 1, 6, rng);
      const std::uint64_t ds = rng();
      std::vector<double> mask;
      Rng r0(ds);
      nn::dropout(x, 0.3, r0, nn::Mode::train, &mask);
      std::vector<double> w(x.data.size());
      randomize(w, rng, 1.0);
      auto g = nn::Batch<double>::vectors(4, 6);
      g.data = w;
      const auto gx = nn::dropout_backward(g, mask);
      auto f = [&] {
        Rng r(ds);
        return weighted(nn::dropout(x, 0.3, r, nn::Mode::train).data, w);
      };
      drop_w = std::max(drop_w, nn::grad_check<double>(f, x.data, gx.data, 1e-5));
    }
    {
      std::vector<double> y(8), p(8);
      for (std::size_t i = 0; i < 8; ++i) {
        y[i] = static_cast<double>(i % 2);
        p[i] = 0.05 + 0.9 * uniform01(rng);
      }
      const auto l = nn::bce_loss(y, p);
      auto f = [&] { return nn::bce_loss(y, p).value; };
      loss_w = std::max(loss_w, nn::grad_check<double>(f, p, l.gradient, 1e-6));
    }
    {
      auto net = build_model<double>(tiny_arch(), static_cast<std::uint64_t>(s));
      const auto x = random_batch<double>(4, 5, 5, 4, rng, 0.0, 0.5);
      const std::vector<double> y{0.0, 1.0, 1.0, 0.0};
      const std::uint64_t ds = rng();
      Rng r0(ds);
      auto [loss, grads] = loss_and_gradient(net, x, std::span<const double>(y), r0);
      auto params = net.trainable_vector();
      const auto analytic = grads.trainable_vector();
      auto f = [&] {
        net.set_trainable(params);
        Rng r(ds);
        return evaluate_loss(net, x, std::span<const double>(y), nn::Mode::train, &r);
      };
      net_w = std::max(net_w, nn::grad_check<double>(f, params, analytic, 1e-5));
    }
  }
  // Desk-sized network, every parameter.
  {
    const std::uint64_t s = 1;
    Rng rng(derive_seed(2000 + s, streams::init));
    auto net = build_model<double>(ArchitectureConfig::desk(), s);
    const auto x = random_batch<double>(4, 5, 5, 4, rng, 0.0, 0.5);
    const std::vector<double> y{1.0, 0.0, 1.0, 0.0};
    const std::uint64_t ds = rng();
    Rng r0(ds);
    auto [loss, grads] = loss_and_gradient(net, x, std::span<const double>(y), r0);
    auto params = net.trainable_vector();
    const auto analytic = grads.trainable_vector();
    auto f = [&] {
      net.set_trainable(params);
      Rng r(ds);
      return evaluate_loss(net, x, std::span<const double>(y), nn::Mode::train, &r);
    };
    desk_w = std::max(desk_w, nn::grad_check<double>(f, params, analytic, 1e-5));
  }
  const double secs = seconds_since(t0);
  v.require(conv_w < kTol, "conv " + fmt(conv_w, 2));
  v.require(dense_w < kTol, "dense " + fmt(dense_w, 2));
  v.require(bn_w < kTol, "batchnorm " + fmt(bn_w, 2));
  v.require(drop_w < kTol, "dropout " + fmt(drop_w, 2));
  v.require(loss_w < kTol, "bce " + fmt(loss_w, 2));
  v.require(net_w < kTol, "network " + fmt(net_w, 2));
  v.require(desk_w < kTol, "desk-net " + fmt(desk_w, 2));
  v.require(secs < 60.0, fmt(kSeeds, 3) + " seeds in " + fmt(secs, 3) + " s");
  return v;
}

// ------------------------------------------------------------- criterion 2

std::pair<std::size_t, std::size_t> brute_force_counts(const ArchitectureConfig& arch) {
  const auto net = build_model<float>(arch, 1);
  std::size_t tr = 0, nt = 0;
  net.for_each_blob([&](const char*, auto blob, bool trainable) { (trainable ? tr : nt) += blob.size(); });
  return {tr, nt};
}

Verdict criterion_parameter_counts() {
  Verdict v;
  for (const auto& [name, arch, tr, nt] :
       {std::tuple{"desk", ArchitectureConfig::desk(), std::size_t{38017}, std::size_t{192}},
        std::tuple{"paper", ArchitectureConfig::paper(), std::size_t{594433}, std::size_t{768}}}) {
    const auto c = count_params(arch);
    const auto [btr, bnt] = brute_force_counts(arch);
    v.require(c.trainable == tr && btr == tr && c.non_trainable == nt && bnt == nt,
              std::string(name) + " " + std::to_string(btr) + "/" + std::to_string(bnt));
  }
  return v;
}

// ------------------------------------------------------------- criterion 3

Verdict criterion_convergence(const TrainedZone& a) {
  Verdict v;
  const auto& h = a.result.history;
  const std::size_t n = h.train_loss.size();
  v.require(n == 25, std::to_string(n) + " epochs");
  const double tl = h.train_loss.back(), vl = h.validation_loss.back();
  v.require(tl < 0.1 && vl < 0.1, "train " + fmt(tl) + " val " + fmt(vl));
  double gap = 0.0;
  for (std::size_t e = n >= 5 ? n - 5 : 0; e < n; ++e)
    gap = std::max(gap, std::abs(h.train_loss[e] - h.validation_loss[e]));
  v.require(gap < 0.05, "max |train-val| last 5 " + fmt(gap, 3));
  v.require(a.seconds < 300.0, fmt(a.seconds, 4) + " s");
  return v;
}

// --------------------------------------------------------- criteria 4 and 5

struct HeldOut {
  pipeline::ZoneProbability prob;
  raster::ValidityMask mask;
  ZoneTruth truth;
  eval::AoiReport report;
};

HeldOut evaluate_held_out(const ModelParameters& model, const TrainedZone& z) {
  HeldOut h;
  h.prob = predict_all(model, z.inputs);
  h.mask = held_out_mask(z.inputs.tiles, z.result.samples.tiles, h.prob.valid);
  h.truth = truth_of(z.scene);
  h.report = eval::evaluate_aoi(z.scene.zone_id, h.prob.probability, h.truth.density, h.truth.reference, h.mask);
  return h;
}

Verdict criterion_quality(const HeldOut& h) {
  Verdict v;
  const auto& lo = h.report.thresholds[0].metrics;
  const auto& hi = h.report.thresholds[1].metrics;
  v.require(lo.balanced_accuracy >= 0.90, "BA@0.2 " + fmt(lo.balanced_accuracy));
  v.require(lo.kappa >= 0.6, "kappa@0.2 " + fmt(lo.kappa));
  v.require(lo.balanced_accuracy >= hi.balanced_accuracy,
            "BA@0.2 >= BA@0.5 (" + fmt(lo.balanced_accuracy) + " vs " + fmt(hi.balanced_accuracy) + ")");
  return v;
}

Verdict criterion_regression(const HeldOut& h) {
  Verdict v;
  const auto& reg = h.report.regression;
  v.require(reg.r >= 0.6 && reg.slope > 0.0, "r " + fmt(reg.r) + " slope " + fmt(reg.slope));
  Rng rng(5);
  std::vector<float> p(4096);
  std::vector<double> d(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = static_cast<float>(uniform01(rng));
    d[i] = 0.5 * static_cast<double>(p[i]);
  }
  const auto exact = eval::regress_density(p, d, raster::ValidityMask(p.size(), 1));
  v.require(std::abs(exact.slope - 0.5) <= 1e-12 && std::abs(exact.r - 1.0) <= 1e-12,
            "exact line slope-0.5 " + fmt(exact.slope - 0.5, 2) + " r-1 " + fmt(exact.r - 1.0, 2));
  return v;
}

// ------------------------------------------------------------- criterion 6

bool block_any_brute(const raster::RasterGrid& labels, std::size_t r, std::size_t c) {
  for (long dr = -2; dr <= 2; ++dr)
    for (long dc = -2; dc <= 2; ++dc) {
      const long rr = static_cast<long>(r) + dr, cc = static_cast<long>(c) + dc;
      if (rr < 0 || cc < 0 || rr >= static_cast<long>(labels.height) || cc >= static_cast<long>(labels.width))
        continue;
      if (labels.at(0, static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) == 1.0f) return true;
    }
  return false;
}

Verdict criterion_sampling(const TrainedZone& a) {
  Verdict v;
  const auto& z = a.inputs;
  const auto selected = sampling::select_training_tiles(z.tiles, 1.0, false);
  Rng rng(derive_seed(11, streams::sampling));
  const auto set = sampling::build_sample_set(z.mosaic.valid, z.labels, selected, 0.6, rng, 11);
  std::size_t expected_bu = 0, found_bu = 0;
  std::vector<std::uint8_t> kept(z.labels.width * z.labels.height, 0);
  for (const auto& s : set.samples)
    if (s.label) kept[s.row * z.labels.width + s.col] = 1;
  for (std::size_t r = 0; r < z.labels.height; ++r)
    for (std::size_t c = 0; c < z.labels.width; ++c) {
      if (!z.mosaic.valid(r, c) || !block_any_brute(z.labels, r, c)) continue;
      ++expected_bu;
      found_bu += kept[r * z.labels.width + c];
    }
  v.require(expected_bu > 0 && found_bu == expected_bu && set.built_up == expected_bu,
            "BU recall " + std::to_string(found_bu) + "/" + std::to_string(expected_bu));
  const double n = static_cast<double>(set.non_built_up_candidates);
  const double rate = static_cast<double>(set.non_built_up) / n;
  const double sigma = std::sqrt(0.6 * 0.4 / n);
  v.require(n >= 1e4 && std::abs(rate - 0.6) <= 3.0 * sigma,
            "keep " + fmt(rate, 5) + " over " + fmt(n, 7) + " (3sigma " + fmt(3 * sigma, 2) + ")");
  bool board = true;
  for (std::size_t rows = 1; rows <= 8; ++rows)
    for (std::size_t cols = 1; cols <= 8; ++cols) {
      const auto tiles = raster::tile_grid({rows * 8, cols * 8}, 8);
      const auto sel = sampling::select_training_tiles(tiles, 0.5, false);
      const std::size_t k = tiles.size();
      board = board && (sel.size() == k / 2 || sel.size() == (k + 1) / 2);
    }
  v.require(board, "checkerboard ceil/floor(n/2) on 64 grids");
  return v;
}

// ------------------------------------------------------------- criterion 7

Verdict criterion_oracles(const TrainedZone& a) {
  Verdict v;
  const auto& model = a.result.model;
  // predict_tile against one forward pass per zero-padded patch.
  raster::RasterGrid crop = a.scene.composite.like(48, 40, 4, raster::DType::i16);
  for (std::size_t b = 0; b < 4; ++b)
    for (std::size_t r = 0; r < 40; ++r)
      for (std::size_t c = 0; c < 48; ++c) crop.at(b, r, c) = a.scene.composite.at(b, 100 + r, 200 + c);
  const auto rescaled = raster::rescale_reflectance(crop, kDivisor);
  const auto tile = pipeline::predict_tile(model, rescaled);
  const auto padded = raster::pad_constant(rescaled.grid, 2, 0.0f);
  raster::PatchStream stream(padded);
  double worst = 0.0;
  while (auto p = stream.next()) {
    if (!rescaled.valid(p->row, p->col)) continue;
    nn::Batch<float> one(1, 5, 5, 4);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t b = 0; b < 4; ++b) one.data[(i * 5 + j) * 4 + b] = p->values(i, j, b);
    worst = std::max(worst, std::abs(static_cast<double>(forward_batch(model, one, nn::Mode::infer)[0]) -
                                     tile.at(p->row, p->col)));
  }
  v.require(worst <= 1e-6, "predict_tile max diff " + fmt(worst, 2));

  // Confusion counts against a direct tally.
  Rng rng(77);
  bool tally_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(uniform01(rng) * 500);
    std::vector<std::uint8_t> pred(n), ref(n);
    raster::ValidityMask m(n, 1);
    std::uint64_t t[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = uniform01(rng) < 0.4;
      ref[i] = uniform01(rng) < 0.25;
      m.valid[i] = uniform01(rng) < 0.9;
      if (m.valid[i]) ++t[pred[i]][ref[i]];
    }
    const auto c = eval::confusion(pred, ref, m);
    tally_ok = tally_ok && c.tp == t[1][1] && c.fp == t[1][0] && c.fn == t[0][1] && c.tn == t[0][0];
  }
  v.require(tally_ok, "confusion == tally (100 draws)");

  // Density against the 10x10 sub-cell centre test on a window of the scene.
  const std::size_t r0 = 180, c0 = 180, rows = 96, cols = 96;
  eval::GridFrame frame{a.scene.labels.origin_x + static_cast<double>(c0) * 10.0,
                        a.scene.labels.origin_y - static_cast<double>(r0) * 10.0, 10.0, rows, cols};
  eval::FootprintSet inside{"A", {}};
  for (const auto& q : a.scene.footprints.rects)
    if (q.x1 > frame.origin_x && q.x0 < frame.origin_x + 960.0 && q.y0 < frame.origin_y &&
        q.y1 > frame.origin_y - 960.0)
      inside.rects.push_back(q);
  const auto dens = eval::rasterize_density(inside, frame);
  std::size_t mismatches = 0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      int hits = 0;
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
          const double x = frame.origin_x + static_cast<double>(c) * 10.0 + j + 0.5;
          const double y = frame.origin_y - static_cast<double>(r) * 10.0 - i - 0.5;
          for (const auto& q : inside.rects)
            if (x >= q.x0 && x < q.x1 && y >= q.y0 && y < q.y1) {
              ++hits;
              break;
            }
        }
      mismatches += dens.at(r, c) != hits / 100.0;
    }
  v.require(mismatches == 0 && !inside.rects.empty(),
            "density == sub-cell brute force (" + std::to_string(inside.rects.size()) + " rects, " +
                std::to_string(mismatches) + " mismatches)");
  return v;
}

// ------------------------------------------------------------- criterion 8

Verdict criterion_determinism(const TrainedZone& a) {
  Verdict v;
  synth::SceneParams p;
  p.rows = p.cols = 128;
  p.tile_pixels = 64;
  p.clusters = 3;
  const auto scene = synth::synth_zone(p, "D");
  const auto zone = pipeline::prepare_zone("D", scene.composite, scene.labels, 64, kDivisor);
  pipeline::TrainingConfig cfg;
  cfg.epochs = 3;
  const auto r1 = pipeline::train_zone(zone, ArchitectureConfig::desk(), cfg);
  const auto r2 = pipeline::train_zone(zone, ArchitectureConfig::desk(), cfg);
  v.require(encode_model(r1.model) == encode_model(r2.model) &&
                r1.history.train_loss == r2.history.train_loss &&
                r1.history.validation_loss == r2.history.validation_loss,
            "two training runs bit-identical");
  const auto w1 = predict_all(a.result.model, a.inputs, 1);
  const auto w4 = predict_all(a.result.model, a.inputs, 4);
  v.require(w1.probability == w4.probability && w1.valid == w4.valid, "workers 1 vs 4 bit-identical");
  return v;
}

// ------------------------------------------------------------- criterion 9

Verdict criterion_transfer(const TrainedZone& a, const TrainedZone& b, const fs::path& work) {
  Verdict v;
  const auto pa = (work / "A.ghsm").string(), pb = (work / "B.ghsm").string();
  save_model(a.result.model, pa);
  save_model(b.result.model, pb);
  pipeline::ZoneRegistry reg;
  reg.record("A", pa, "A");
  reg.record("B", pb, "B");
  const auto close = predict_all(load_model(pb), b.inputs);
  const auto far_run = pipeline::run_transfer(reg, "A", "B2", b.inputs.mosaic, b.inputs.tiles);
  const auto far = pipeline::assemble_zone(far_run.tiles, b.inputs.mosaic.rows, b.inputs.mosaic.cols);
  v.require(far_run.entry.mode == pipeline::TransferMode::far_range, "registry far_range");
  const auto mask = held_out_mask(b.inputs.tiles, b.result.samples.tiles, close.valid);
  const auto truth = truth_of(b.scene);
  const auto cmp = pipeline::compare_transfer(close.probability, far.probability, truth.reference, mask);
  for (const auto& row : cmp.rows) {
    const double c = row.close.metrics.balanced_accuracy, f = row.far.metrics.balanced_accuracy;
    v.require(std::abs(c - f) <= 0.10,
              "BA@" + fmt(row.threshold, 2) + " close " + fmt(c) + " far " + fmt(f));
  }
  const auto j = pipeline::to_json(cmp);
  bool shape = cmp.rows.size() == 2;
  for (const char* metric : {"overall_accuracy", "balanced_accuracy"})
    for (const char* mode : {"close_range", "far_range"})
      for (const char* cut : {"0.2 cut-off", "0.5 cut-off"})
        shape = shape && j.contains(metric) && j[metric].contains(mode) && j[metric][mode].contains(cut);
  v.require(shape, "comparison table shape (OA/BA x close/far x 0.2/0.5)");
  std::ofstream(work / "transfer_table.json") << j.dump(2) << '\n';
  return v;
}

// ------------------------------------------------------------ criterion 10

Verdict criterion_formats(const TrainedZone& a, const fs::path& work) {
  Verdict v;
  bool rasters = true;
  Rng rng(3);
  for (auto dt : {raster::DType::u8, raster::DType::i16, raster::DType::f32}) {
    raster::RasterGrid g(13, 7, 3, dt, dt == raster::DType::f32 ? -1.0 : 255.0);
    g.zone_id = "fmt";
    for (auto& x : g.data) {
      const double u = uniform01(rng);
      x = dt == raster::DType::u8    ? std::floor(static_cast<float>(u * 255))
          : dt == raster::DType::i16 ? std::floor(static_cast<float>(u * 60000 - 30000))
                                     : static_cast<float>(u);
    }
    const auto bytes = raster::encode_raster(g);
    const auto path = (work / ("fmt_" + std::string(raster::to_string(dt)) + ".ghsr")).string();
    raster::write_raster(g, path);
    std::ifstream in(path, std::ios::binary);
    const std::vector<unsigned char> disk((std::istreambuf_iterator<char>(in)), {});
    rasters = rasters && disk == bytes && raster::encode_raster(raster::read_raster(path)) == bytes &&
              bytes.size() == raster::kRasterHeaderSize + g.data.size() * raster::dtype_size(dt);
  }
  rasters = rasters && raster::encode_raster(a.scene.composite) ==
                           raster::encode_raster(raster::decode_raster(raster::encode_raster(a.scene.composite)));
  v.require(rasters, "GHSR byte-exact (u8/i16/f32 + scene)");
  const auto mb = encode_model(a.result.model);
  const auto path = (work / "fmt.ghsm").string();
  save_model(a.result.model, path);
  v.require(encode_model(decode_model(mb)) == mb && encode_model(load_model(path)) == mb,
            "GHSM byte-exact (" + std::to_string(mb.size()) + " bytes)");
  raster::RasterGrid p(3, 1, 1, raster::DType::f32);
  p.data = {0.0f, 1.0f, 0.5f};
  raster::ValidityMask m(3, 1);
  m.set(0, 2, false);
  const auto q = raster::quantize_probability(p, m);
  v.require(q.data == std::vector<float>{0.0f, 100.0f, 255.0f}, "quantize 0->0 1->100 nodata->255");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> allow_red;
  std::string report_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--allow-red" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) allow_red.insert(std::stoi(tok));
    } else if (arg == "--report" && i + 1 < argc) {
      report_path = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--allow-red N[,M...]] [--report FILE]\n";
      return 2;
    }
  }

  const fs::path work = fs::temp_directory_path() / "ghs_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  nlohmann::json report = nlohmann::json::array();
  int unexpected = 0;
  auto emit = [&](int id, const char* name, const std::function<Verdict()>& fn) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.notes.push_back(std::string("!exception: ") + e.what());
    }
    std::string detail;
    for (const auto& n : v.notes) detail += (detail.empty() ? "" : "; ") + n;
    const bool allowed = !v.pass && allow_red.count(id);
    std::printf("%s %2d %-18s %s%s\n", v.pass ? "PASS" : "FAIL", id, name, detail.c_str(),
                allowed ? "  [allowed red]" : "");
    std::fflush(stdout);
    if (!v.pass && !allowed) ++unexpected;
    report.push_back({{"criterion", id}, {"name", name}, {"pass", v.pass}, {"notes", v.notes}});
  };

  emit(1, "gradients", criterion_gradients);
  emit(2, "parameter-counts", criterion_parameter_counts);

  const auto [scene_a, scene_b] = synth::synth_twin_zones(synth::SceneParams{}, 42, 43, "A", "B");
  std::fprintf(stderr, "training zone A (default scene, seed 7)\n");
  const auto a = train_default(scene_a);
  emit(3, "convergence", [&] { return criterion_convergence(a); });
  const auto held = evaluate_held_out(a.result.model, a);
  emit(4, "held-out-quality", [&] { return criterion_quality(held); });
  emit(5, "regression", [&] { return criterion_regression(held); });
  emit(6, "sampling", [&] { return criterion_sampling(a); });
  emit(7, "oracles", [&] { return criterion_oracles(a); });
  emit(8, "determinism", [&] { return criterion_determinism(a); });
  std::fprintf(stderr, "training zone B (twin scene, seed 7)\n");
  const auto b = train_default(scene_b);
  emit(9, "twin-zones", [&] { return criterion_transfer(a, b, work); });
  emit(10, "formats", [&] { return criterion_formats(a, work); });

  if (!report_path.empty()) std::ofstream(report_path) << report.dump(2) << '\n';
  fs::remove_all(work);
  return unexpected == 0 ? 0 : 1;
}
