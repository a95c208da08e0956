#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghs/error.hpp"
#include "ghs/model/network.hpp"
#include "ghs/pipeline/zone.hpp"
#include "ghs/rng.hpp"
#include "ghs/sampling/minibatch.hpp"
#include "ghs/sampling/samples.hpp"

namespace ghs::pipeline {

struct EarlyStopping {
  std::size_t patience = 3;
  double min_delta = 1e-4;
};

struct TrainingConfig {
  std::size_t epochs = 25;
  double validation_fraction = 0.10;
  std::uint64_t seed = 7;
  double non_bu_rate = 0.6;
  double tile_fraction = 0.5;
  std::size_t chunk_size = 200000;
  std::size_t batch_size = 1024;
  double learning_rate = 1e-4;
  std::optional<EarlyStopping> early_stopping;
  // Training patches used to reset the batch-norm moving statistics to exact
  // moments after every epoch; 0 keeps the pure moving averages.
  std::size_t bn_recalibration_samples = 32768;

  void validate() const {
    if (epochs == 0) throw ConfigError("epochs must be at least 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
      throw ConfigError("validation fraction must lie in (0, 1)");
    }
    if (batch_size < 2) throw ConfigError("batch size must be at least 2");
    if (chunk_size < batch_size) throw ConfigError("chunk size must be at least the batch size");
    if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  }
};

struct TrainingHistory {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
};

inline nlohmann::json to_json(const TrainingHistory& h) {
  return {{"train_loss", h.train_loss}, {"validation_loss", h.validation_loss}};
}

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Per-class hold-out of round(fraction·n_class) samples (at least one and
/// at most n_class−1 whenever a class has two or more samples).
inline SplitIndices stratified_split(const sampling::SampleSet& set, double fraction, Rng& rng) {
  SplitIndices out;
  for (std::uint8_t label : {std::uint8_t{0}, std::uint8_t{1}}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < set.samples.size(); ++i)
      if (set.samples[i].label == label) idx.push_back(i);
    for (std::size_t i = idx.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
      std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
    }
    auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) n_val = std::clamp<std::size_t>(n_val, 1, idx.size() - 1);
    else n_val = 0;
    out.validation.insert(out.validation.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    out.train.insert(out.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  return out;
}

struct TrainingResult {
  ModelParameters model;
  TrainingHistory history;
  sampling::SampleSet samples;
  SplitIndices split;
  bool water_zone = false;
  std::size_t best_epoch = 0;  // 1-based epoch whose parameters were returned
  bool stopped_early = false;
};

struct EpochReport {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  const ModelParameters* model = nullptr;  // state after this epoch
};

namespace detail {

inline nn::Batch<float> gather_samples(const ZoneMosaic& mosaic, const sampling::SampleSet& set,
                                       const std::vector<std::size_t>& indices,
                                       std::vector<float>& labels) {
  nn::Batch<float> b(indices.size(), kPatchSize, kPatchSize, mosaic.bands);
  labels.resize(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto& s = set.samples[indices[k]];
    mosaic.gather(s.row, s.col, b.sample(k).data());
    labels[k] = static_cast<float>(s.label);
  }
  return b;
}

}  // namespace detail

/// Mean infer-mode cross-entropy over the given samples.
inline double validation_loss(const ModelParameters& model, const ZoneMosaic& mosaic,
                              const sampling::SampleSet& set,
                              const std::vector<std::size_t>& indices,
                              std::size_t batch = 4096) {
  if (indices.empty()) return 0.0;
  double total = 0.0;
  std::vector<float> labels;
  for (std::size_t i0 = 0; i0 < indices.size(); i0 += batch) {
    const std::vector<std::size_t> part(indices.begin() + static_cast<std::ptrdiff_t>(i0),
                                        indices.begin() + static_cast<std::ptrdiff_t>(std::min(indices.size(), i0 + batch)));
    const auto x = detail::gather_samples(mosaic, set, part, labels);
    const auto p = forward_batch(model, x, nn::Mode::infer);
    total += nn::bce_loss(std::span<const float>(labels), std::span<const float>(p)).value *
             static_cast<double>(part.size());
  }
  return total / static_cast<double>(indices.size());
}

/// Per-zone training: systematic tile selection, two-stage sampling,
/// stratified validation hold-out, then epochs of shuffled chunks with Adam.
inline TrainingResult train_zone(const ZoneInputs& zone, const ArchitectureConfig& arch,
                                 const TrainingConfig& cfg,
                                 const std::function<void(const EpochReport&)>& on_epoch = {}) {
  cfg.validate();
  arch.validate();
  if (zone.mosaic.bands != arch.bands) {
    throw ConfigError("zone has " + std::to_string(zone.mosaic.bands) +
                      " bands but the architecture expects " + std::to_string(arch.bands));
  }
  TrainingResult res;
  res.water_zone = sampling::is_water_zone(zone.tiles);
  const auto selected = sampling::select_training_tiles(zone.tiles, cfg.tile_fraction, res.water_zone);

  Rng sample_rng(derive_seed(cfg.seed, streams::sampling));
  res.samples = sampling::build_sample_set(zone.mosaic.valid, zone.labels, selected,
                                           cfg.non_bu_rate, sample_rng, cfg.seed);
  if (res.samples.built_up == 0 || res.samples.non_built_up == 0) {
    throw DegenerateError("zone " + zone.zone_id + " has " + std::to_string(res.samples.built_up) +
                          " built-up and " + std::to_string(res.samples.non_built_up) +
                          " non-built-up samples; both classes are required");
  }
  Rng split_rng(derive_seed(cfg.seed, streams::split));
  res.split = stratified_split(res.samples, cfg.validation_fraction, split_rng);

  ModelParameters model = build_model<float>(arch, cfg.seed);
  model.zone_id = zone.zone_id;
  nn::AdamState optimizer(model.trainable_vector().size(), cfg.learning_rate);
  Rng shuffle_rng(derive_seed(cfg.seed, streams::shuffle));
  Rng dropout_rng(derive_seed(cfg.seed, streams::dropout));

  double best = std::numeric_limits<double>::infinity();
  ModelParameters best_model = model;
  std::size_t since_best = 0;
  std::vector<float> labels;

  nn::Batch<float> recal_patches;
  if (cfg.bn_recalibration_samples > 0) {
    const std::size_t n = std::min(cfg.bn_recalibration_samples, res.split.train.size());
    std::vector<std::size_t> idx(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = res.split.train[k * res.split.train.size() / n];
    std::vector<float> unused;
    recal_patches = detail::gather_samples(zone.mosaic, res.samples, idx, unused);
  }

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto batches = sampling::shuffle_minibatches(res.split.train.size(), cfg.chunk_size,
                                                 cfg.batch_size, shuffle_rng);
    // Batch statistics need two samples; fold a singleton tail into its neighbour.
    if (batches.size() > 1 && batches.back().size() == 1) {
      batches[batches.size() - 2].push_back(batches.back().front());
      batches.pop_back();
    }
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      if (batches[b].size() < 2) continue;
      std::vector<std::size_t> idx(batches[b].size());
      for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = res.split.train[batches[b][k]];
      const auto x = detail::gather_samples(zone.mosaic, res.samples, idx, labels);
      double loss = 0.0;
      try {
        loss = train_step(model, x, std::span<const float>(labels), optimizer, dropout_rng);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (zone " + zone.zone_id + ", epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(b) + ")");
      }
      loss_sum += loss * static_cast<double>(idx.size());
      seen += idx.size();
    }
    const double train_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
    if (recal_patches.count >= 2) recalibrate_batch_norm(model, recal_patches);
    const double val_loss = validation_loss(model, zone.mosaic, res.samples, res.split.validation);
    if (!std::isfinite(val_loss)) {
      throw NumericError("non-finite validation loss (zone " + zone.zone_id + ", epoch " +
                         std::to_string(epoch) + ")");
    }
    res.history.train_loss.push_back(train_loss);
    res.history.validation_loss.push_back(val_loss);
    model.epochs = static_cast<std::uint32_t>(epoch);
    if (on_epoch) on_epoch({epoch, train_loss, val_loss, &model});

    if (cfg.early_stopping) {
      if (val_loss < best - cfg.early_stopping->min_delta) {
        best = val_loss;
        best_model = model;
        res.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= cfg.early_stopping->patience) {
        res.stopped_early = true;
        break;
      }
    }
  }
  if (cfg.early_stopping && res.best_epoch > 0) {
    res.model = std::move(best_model);
  } else {
    res.model = std::move(model);
    res.best_epoch = res.history.train_loss.size();
  }
  return res;
}

}  // namespace ghs::pipeline
