#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ghs/error.hpp"
#include "ghs/raster/grid.hpp"

namespace ghs::eval {

struct Regression {
  double r = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t pixels = 0;
};

/// Ordinary least squares of density (response) on probability
/// (predictor) over valid pixels, plus the Pearson correlation of the pair.
/// Sums are taken about the means to keep exact lines exact.
inline Regression regress_density(std::span<const float> probability,
                                  std::span<const double> density,
                                  const raster::ValidityMask& valid) {
  if (probability.size() != density.size() || probability.size() != valid.valid.size()) {
    throw ShapeError("regress_density: probability, density and mask sizes differ");
  }
  double sx = 0, sy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < probability.size(); ++i) {
    if (!valid.valid[i]) continue;
    sx += probability[i];
    sy += density[i];
    ++n;
  }
  if (n < 2) throw StatisticError("regression needs at least two valid pixels");
  const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < probability.size(); ++i) {
    if (!valid.valid[i]) continue;
    const double dx = probability[i] - mx, dy = density[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0) throw StatisticError("regression undefined: probability has zero variance");
  if (syy <= 0.0) throw StatisticError("regression undefined: density has zero variance");
  Regression out;
  out.pixels = n;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return out;
}

/// Built-up iff probability >= threshold (inclusive).
inline std::vector<std::uint8_t> binarize(std::span<const float> probability, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("threshold must lie in (0, 1), got " + std::to_string(threshold));
  }
  std::vector<std::uint8_t> out(probability.size());
  for (std::size_t i = 0; i < probability.size(); ++i) {
    out[i] = static_cast<double>(probability[i]) >= threshold;
  }
  return out;
}

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double threshold = 0.0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

inline ConfusionCounts confusion(std::span<const std::uint8_t> predicted,
                                 std::span<const std::uint8_t> reference,
                                 const raster::ValidityMask& valid, double threshold = 0.0) {
  if (predicted.size() != reference.size() || predicted.size() != valid.valid.size()) {
    throw ShapeError("confusion: predicted (" + std::to_string(predicted.size()) +
                     "), reference (" + std::to_string(reference.size()) + ") and mask (" +
                     std::to_string(valid.valid.size()) + ") sizes differ");
  }
  ConfusionCounts c;
  c.threshold = threshold;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!valid.valid[i]) continue;
    const bool p = predicted[i] != 0, r = reference[i] != 0;
    if (p && r) ++c.tp;
    else if (p) ++c.fp;
    else if (r) ++c.fn;
    else ++c.tn;
  }
  return c;
}

struct AccuracyMetrics {
  double overall_accuracy = 0.0;
  double balanced_accuracy = 0.0;
  double kappa = 0.0;
};

/// OA, balanced accuracy (mean of TPR and TNR) and Cohen's kappa with
/// chance agreement from the marginal products.
inline AccuracyMetrics accuracy_metrics(const ConfusionCounts& c) {
  const double total = static_cast<double>(c.total());
  if (c.total() == 0) throw StatisticError("accuracy metrics on zero pixels");
  if (c.tp + c.fn == 0) {
    throw StatisticError("balanced accuracy undefined: reference has no built-up pixels");
  }
  if (c.tn + c.fp == 0) {
    throw StatisticError("balanced accuracy undefined: reference has no non-built-up pixels");
  }
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
  AccuracyMetrics m;
  m.overall_accuracy = (tp + tn) / total;
  m.balanced_accuracy = 0.5 * (tp / (tp + fn) + tn / (tn + fp));
  const double p_o = m.overall_accuracy;
  const double p_e = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (total * total);
  m.kappa = p_e < 1.0 ? (p_o - p_e) / (1.0 - p_e) : 0.0;
  return m;
}

}  // namespace ghs::eval
