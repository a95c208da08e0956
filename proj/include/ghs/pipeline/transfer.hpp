#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghs/error.hpp"
#include "ghs/eval/report.hpp"
#include "ghs/model/serialize.hpp"
#include "ghs/pipeline/predict.hpp"

namespace ghs::pipeline {

/// close_range: a zone's model applied to its own tiles.
/// far_range: another zone's parameters applied to this zone.
enum class TransferMode { close_range, far_range };

inline const char* to_string(TransferMode m) {
  return m == TransferMode::close_range ? "close_range" : "far_range";
}

inline TransferMode transfer_mode_from(const std::string& s) {
  if (s == "close_range") return TransferMode::close_range;
  if (s == "far_range") return TransferMode::far_range;
  throw RegistryError("unknown transfer mode '" + s + "'");
}

struct RegistryEntry {
  std::string model_path;
  TransferMode mode = TransferMode::close_range;
  std::string source_zone;
  bool operator==(const RegistryEntry&) const = default;
};

class ZoneRegistry {
 public:
  /// Records that `target` is served by the model trained on `source`.
  const RegistryEntry& record(const std::string& target, const std::string& model_path,
                              const std::string& source) {
    RegistryEntry e{model_path,
                    source == target ? TransferMode::close_range : TransferMode::far_range,
                    source};
    return entries_[target] = e;
  }

  bool contains(const std::string& zone) const { return entries_.count(zone) != 0; }

  const RegistryEntry& at(const std::string& zone) const {
    auto it = entries_.find(zone);
    if (it == entries_.end()) throw RegistryError("no model registered for zone '" + zone + "'");
    return it->second;
  }

  const std::map<std::string, RegistryEntry>& entries() const { return entries_; }

  nlohmann::json to_json() const {
    nlohmann::json zones = nlohmann::json::object();
    for (const auto& [zone, e] : entries_) {
      zones[zone] = {{"model", e.model_path}, {"mode", to_string(e.mode)}, {"source_zone", e.source_zone}};
    }
    return {{"zones", zones}};
  }

  static ZoneRegistry from_json(const nlohmann::json& j) {
    ZoneRegistry r;
    try {
      for (const auto& [zone, e] : j.at("zones").items()) {
        RegistryEntry entry{e.at("model").get<std::string>(),
                            transfer_mode_from(e.at("mode").get<std::string>()),
                            e.at("source_zone").get<std::string>()};
        if (entry.mode == TransferMode::far_range && entry.source_zone == zone) {
          throw RegistryError("far-range entry for zone '" + zone + "' names itself as source");
        }
        r.entries_[zone] = entry;
      }
    } catch (const nlohmann::json::exception& e) {
      throw RegistryError(std::string("malformed registry: ") + e.what());
    }
    return r;
  }

  /// Missing file yields an empty registry.
  static ZoneRegistry load(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {};
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw RegistryError("cannot parse registry '" + path + "': " + e.what());
    }
    return from_json(j);
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write registry '" + path + "'");
    out << to_json().dump(2) << "\n";
  }

 private:
  std::map<std::string, RegistryEntry> entries_;
};

struct TransferResult {
  std::vector<TileOutcome> tiles;
  RegistryEntry entry;
};

/// Applies the model registered for `source_zone` to the target tiles and
/// records the target's provenance in the registry.
inline TransferResult run_transfer(ZoneRegistry& registry, const std::string& source_zone,
                                   const std::string& target_zone, const ZoneMosaic& target,
                                   const std::vector<raster::TileIndex>& tiles, unsigned workers = 1) {
  if (!registry.contains(source_zone)) {
    throw RegistryError("no trained model registered for source zone '" + source_zone + "'");
  }
  const std::string model_path = registry.at(source_zone).model_path;
  ModelParameters model;
  try {
    model = load_model(model_path);
  } catch (const IoError& e) {
    throw RegistryError("model for zone '" + source_zone + "' unavailable: " + e.what());
  }
  TransferResult res;
  res.tiles = predict_zone(model, target, tiles, workers);
  res.entry = registry.record(target_zone, model_path, source_zone);
  return res;
}

struct TransferRow {
  double threshold = 0.0;
  eval::ThresholdResult close;
  eval::ThresholdResult far;
};

struct TransferComparison {
  std::vector<TransferRow> rows;
};

/// Close- versus far-range accuracy over the same reference pixels.
inline TransferComparison compare_transfer(std::span<const float> close_probability,
                                           std::span<const float> far_probability,
                                           std::span<const std::uint8_t> reference,
                                           const raster::ValidityMask& valid,
                                           const std::vector<double>& thresholds = eval::kDefaultThresholds) {
  if (close_probability.size() != reference.size() || far_probability.size() != reference.size() ||
      valid.valid.size() != reference.size()) {
    throw ShapeError("compare_transfer: prediction sets and reference cover different pixels");
  }
  TransferComparison cmp;
  for (double t : thresholds) {
    TransferRow row;
    row.threshold = t;
    for (auto [probs, slot] : {std::pair{close_probability, &row.close}, std::pair{far_probability, &row.far}}) {
      slot->threshold = t;
      slot->counts = eval::confusion(eval::binarize(probs, t), reference, valid, t);
      slot->metrics = eval::accuracy_metrics(slot->counts);
    }
    cmp.rows.push_back(row);
  }
  return cmp;
}

inline std::string cutoff_label(double t) {
  std::ostringstream os;
  os << t << " cut-off";
  return os.str();
}

/// Overall and balanced accuracy per cut-off, close vs far range side by side.
inline nlohmann::json to_json(const TransferComparison& cmp) {
  nlohmann::json oa, ba;
  for (const char* mode : {"close_range", "far_range"}) {
    oa[mode] = nlohmann::json::object();
    ba[mode] = nlohmann::json::object();
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : cmp.rows) {
    const auto key = cutoff_label(r.threshold);
    oa["close_range"][key] = r.close.metrics.overall_accuracy;
    oa["far_range"][key] = r.far.metrics.overall_accuracy;
    ba["close_range"][key] = r.close.metrics.balanced_accuracy;
    ba["far_range"][key] = r.far.metrics.balanced_accuracy;
    rows.push_back({{"threshold", r.threshold},
                    {"close_range", eval::to_json(r.close)},
                    {"far_range", eval::to_json(r.far)}});
  }
  return {{"overall_accuracy", oa}, {"balanced_accuracy", ba}, {"rows", rows}};
}

}  // namespace ghs::pipeline
