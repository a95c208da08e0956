#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghs/eval/metrics.hpp"

namespace ghs::eval {

inline const std::vector<double> kDefaultThresholds{0.2, 0.5};

struct ThresholdResult {
  double threshold = 0.0;
  ConfusionCounts counts;
  AccuracyMetrics metrics;
};

struct AoiReport {
  std::string aoi_id;
  Regression regression;
  std::vector<ThresholdResult> thresholds;
};

struct EvaluationReport {
  std::vector<AoiReport> aois;
};

/// Scores one AOI: regression of density on probability, then confusion
/// and accuracy at each threshold against the binary reference.
inline AoiReport evaluate_aoi(const std::string& aoi_id, std::span<const float> probability,
                              std::span<const double> density,
                              std::span<const std::uint8_t> reference,
                              const raster::ValidityMask& valid,
                              const std::vector<double>& thresholds = kDefaultThresholds) {
  AoiReport a;
  a.aoi_id = aoi_id;
  a.regression = regress_density(probability, density, valid);
  for (double t : thresholds) {
    const auto pred = binarize(probability, t);
    ThresholdResult tr;
    tr.threshold = t;
    tr.counts = confusion(pred, reference, valid, t);
    tr.metrics = accuracy_metrics(tr.counts);
    a.thresholds.push_back(tr);
  }
  return a;
}

inline nlohmann::json to_json(const ThresholdResult& t) {
  return {{"threshold", t.threshold},
          {"tp", t.counts.tp},
          {"fp", t.counts.fp},
          {"fn", t.counts.fn},
          {"tn", t.counts.tn},
          {"overall_accuracy", t.metrics.overall_accuracy},
          {"balanced_accuracy", t.metrics.balanced_accuracy},
          {"kappa", t.metrics.kappa}};
}

inline nlohmann::json to_json(const EvaluationReport& report) {
  nlohmann::json aois = nlohmann::json::array();
  for (const auto& a : report.aois) {
    nlohmann::json th = nlohmann::json::array();
    for (const auto& t : a.thresholds) th.push_back(to_json(t));
    aois.push_back({{"aoi_id", a.aoi_id},
                    {"r", a.regression.r},
                    {"slope", a.regression.slope},
                    {"intercept", a.regression.intercept},
                    {"pixels", a.regression.pixels},
                    {"thresholds", th}});
  }
  return {{"aois", aois}};
}

/// One row per AOI: id, r, slope, intercept, then OA/BA/kappa per threshold.
inline std::string to_csv(const EvaluationReport& report) {
  std::ostringstream os;
  os.precision(10);
  os << "aoi_id,r,slope,intercept";
  if (!report.aois.empty()) {
    for (const auto& t : report.aois.front().thresholds) {
      os << ",oa_" << t.threshold << ",ba_" << t.threshold << ",kappa_" << t.threshold;
    }
  }
  os << "\n";
  for (const auto& a : report.aois) {
    os << a.aoi_id << "," << a.regression.r << "," << a.regression.slope << ","
       << a.regression.intercept;
    for (const auto& t : a.thresholds) {
      os << "," << t.metrics.overall_accuracy << "," << t.metrics.balanced_accuracy << ","
         << t.metrics.kappa;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace ghs::eval
