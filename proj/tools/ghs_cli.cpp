// ghs: synthetic data, training, prediction, transfer and evaluation runs.
// Every command writes a JSON run manifest; see README.md for exit codes.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "ghs/ghs.hpp"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "1.0.0";

enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kIo = 3,
  kFormat = 4,
  kConfig = 5,
  kShape = 6,
  kNumeric = 7,
  kDegenerate = 8,
  kStatistic = 9,
  kRegistry = 10,
  kGeneration = 11,
  kPartial = 12,
};

int exit_code(ghs::ErrorKind k) {
  using K = ghs::ErrorKind;
  switch (k) {
    case K::io: return kIo;
    case K::format: return kFormat;
    case K::config: return kConfig;
    case K::shape: return kShape;
    case K::numeric: return kNumeric;
    case K::degenerate: return kDegenerate;
    case K::statistic: return kStatistic;
    case K::registry: return kRegistry;
    case K::generation: return kGeneration;
  }
  return kInternal;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ghs::IoError("cannot hash " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

json file_record(const fs::path& path) {
  return {{"path", path.generic_string()},
          {"bytes", fs::file_size(path)},
          {"sha256", sha256_file(path)}};
}

json file_records(const std::vector<fs::path>& paths) {
  json out = json::array();
  for (const auto& p : paths) out.push_back(file_record(p));
  return out;
}

/// Run manifest, written on success and failure alike once its path is known.
struct Manifest {
  json doc = json::object();
  fs::path path;
  Clock::time_point start = Clock::now();
  Clock::time_point mark = start;

  void lap(const std::string& phase) {
    const auto now = Clock::now();
    doc["timings"][phase] = std::chrono::duration<double>(now - mark).count();
    mark = now;
  }

  void write() {
    if (path.empty()) return;
    doc["timings"]["total"] = std::chrono::duration<double>(Clock::now() - start).count();
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << doc.dump(2) << '\n';
    if (!out) std::cerr << "ghs: warning: could not write manifest " << path << '\n';
  }
};

/// Every option of a subcommand with its effective value, so a manifest can
/// replay the command.
json echo_config(const CLI::App& sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "manifest") continue;
    if (opt->get_expected_min() == 0) {
      cfg[name] = opt->count() > 0 && opt->as<bool>();
      continue;
    }
    if (opt->count() > 0) {
      const auto& r = opt->results();
      if (opt->get_expected_max() > 1 || r.size() > 1) {
        cfg[name] = r;
      } else {
        cfg[name] = r.front();
      }
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double t = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(t);
    } catch (const std::exception&) {
      throw ghs::ConfigError("cannot parse threshold '" + item + "'");
    }
  }
  if (out.empty()) throw ghs::ConfigError("no thresholds given");
  for (double t : out) {
    if (!(t > 0.0 && t < 1.0)) throw ghs::ConfigError("thresholds must lie in (0, 1)");
  }
  return out;
}

std::string zone_name(std::size_t k) {
  if (k >= 26) throw ghs::ConfigError("at most 26 zones (A..Z) per synth run");
  return std::string(1, static_cast<char>('A' + k));
}

json tile_statuses(const std::vector<ghs::pipeline::TileStatus>& status) {
  json out = json::array();
  for (const auto& s : status) out.push_back(ghs::pipeline::to_json(s));
  return out;
}

// ---------------------------------------------------------------- options

struct SynthOpts {
  std::string out;
  std::size_t zones = 1;
  std::size_t rows = 512, cols = 512, tile_size = 256;
  std::uint64_t seed = 42;
  ghs::synth::SceneParams scene;
};

struct TrainOpts {
  std::string zone, data, out, preset = "desk", history, registry;
  ghs::pipeline::TrainingConfig cfg;
  double divisor = 10000.0;
  bool early_stopping = false;
  std::size_t patience = 3;
  double min_delta = 1e-4;
};

struct PredictOpts {
  std::string model, zone, data, out, registry, source_zone;
  unsigned workers = 1;
  std::optional<double> divisor;
};

struct EvaluateOpts {
  std::string probs, reference, report, csv, far, aoi;
  std::string thresholds = "0.2,0.5";
};

struct InspectOpts {
  std::string file;
};

struct ReplayOpts {
  std::string manifest;
};

ghs::synth::SceneParams scene_for(const SynthOpts& o, std::size_t k) {
  auto p = o.scene;
  p.rows = o.rows;
  p.cols = o.cols;
  p.tile_pixels = o.tile_size;
  p.seed = o.seed + k;
  return p;
}

json scene_json(const ghs::synth::SceneParams& p) {
  return {{"rows", p.rows},
          {"cols", p.cols},
          {"tile_pixels", p.tile_pixels},
          {"pixel_size", p.pixel_size},
          {"origin_x", p.origin_x},
          {"origin_y", p.origin_y},
          {"clusters", p.clusters},
          {"buildings_per_cluster", p.buildings_per_cluster},
          {"cluster_radius_px", p.cluster_radius_px},
          {"building_min_px", p.building_min_px},
          {"building_max_px", p.building_max_px},
          {"background", p.background},
          {"built_offset", p.built_offset},
          {"noise_sigma", p.noise_sigma},
          {"nodata_fraction", p.nodata_fraction},
          {"seed", p.seed}};
}

// --------------------------------------------------------------- commands

int run_synth(const SynthOpts& o, Manifest& man) {
  if (o.zones == 0) throw ghs::ConfigError("--zones must be at least 1");
  json zones = json::array();
  for (std::size_t k = 0; k < o.zones; ++k) {
    const std::string id = zone_name(k);
    const auto params = scene_for(o, k);
    const auto z = ghs::synth::synth_zone(params, id);
    const fs::path dir = fs::path(o.out) / id;

    ghs::pipeline::ZoneMeta meta;
    meta.zone_id = id;
    meta.tile_pixels = params.tile_pixels;
    meta.tiles = z.tiles;
    meta.extra = {{"scene", scene_json(params)}};
    const auto written = ghs::pipeline::write_zone(dir, meta, z.composite, z.labels, &z.footprints);

    std::size_t built = 0, labelled = 0;
    for (float v : z.labels.data) {
      labelled += v != 255.0f;
      built += v == 1.0f;
    }
    const auto blocks = ghs::sampling::built_up_blocks(z.labels);
    std::size_t bu_blocks = 0;
    for (auto b : blocks) bu_blocks += b;
    json stats{{"built_up_pixel_fraction", double(built) / double(labelled)},
               {"built_up_patch_fraction", double(bu_blocks) / double(blocks.size())},
               {"buildings", z.footprints.rects.size()}};

    Manifest zm;
    zm.path = dir / "manifest.json";
    zm.doc = {{"tool", "ghs"}, {"version", kVersion}, {"command", "synth"}, {"zone", id},
              {"config", man.doc["config"]}, {"seeds", {{"scene", params.seed}}},
              {"scene", scene_json(params)}, {"stats", stats},
              {"outputs", file_records(written)}, {"status", "ok"}};
    zm.write();
    zones.push_back({{"zone", id}, {"dir", dir.generic_string()}, {"seed", params.seed},
                     {"stats", stats}, {"manifest", file_record(zm.path)}});
    std::cerr << "zone " << id << ": " << z.tiles.size() << " tiles, "
              << z.footprints.rects.size() << " buildings\n";
  }
  man.doc["seeds"] = {{"scene", o.seed}};
  man.doc["zones"] = zones;
  man.lap("synth");
  return kOk;
}

ghs::ArchitectureConfig preset_for(const std::string& name, double divisor) {
  auto arch = ghs::ArchitectureConfig::preset(name);
  arch.normalization_divisor = divisor;
  return arch;
}

int run_train(TrainOpts o, Manifest& man) {
  if (o.early_stopping) o.cfg.early_stopping = ghs::pipeline::EarlyStopping{o.patience, o.min_delta};
  o.cfg.validate();
  const auto arch = preset_for(o.preset, o.divisor);
  arch.validate();
  const fs::path dir = fs::path(o.data) / o.zone;
  const auto loaded = ghs::pipeline::load_zone(dir);
  man.doc["inputs"] = {{"zone_dir", dir.generic_string()},
                       {"zone_meta", file_record(dir / "zone.json")}};
  man.doc["tiles"] = tile_statuses(loaded.status);
  man.lap("load");

  const auto inputs = ghs::pipeline::prepare_zone(o.zone, loaded.composite, loaded.labels,
                                                  loaded.meta.tile_pixels, o.divisor);
  const auto res = ghs::pipeline::train_zone(inputs, arch, o.cfg, [&](const auto& e) {
    std::cerr << "epoch " << e.epoch << "/" << o.cfg.epochs << "  train " << e.train_loss
              << "  val " << e.validation_loss << '\n';
  });
  man.lap("train");

  ghs::save_model(res.model, o.out);
  const std::string history_path = o.history.empty() ? o.out + ".history.json" : o.history;
  json history = ghs::pipeline::to_json(res.history);
  history["best_epoch"] = res.best_epoch;
  history["stopped_early"] = res.stopped_early;
  history["water_zone"] = res.water_zone;
  history["samples"] = ghs::sampling::sample_manifest(res.samples);
  ghs::pipeline::write_json(history_path, history);

  std::vector<fs::path> outputs{o.out, history_path};
  if (!o.registry.empty()) {
    auto reg = ghs::pipeline::ZoneRegistry::load(o.registry);
    reg.record(o.zone, o.out, o.zone);
    reg.save(o.registry);
    outputs.emplace_back(o.registry);
  }
  const auto counts = ghs::count_params(arch);
  man.doc["seeds"] = {{"training", o.cfg.seed},
                      {"init", ghs::derive_seed(o.cfg.seed, ghs::streams::init)},
                      {"sampling", ghs::derive_seed(o.cfg.seed, ghs::streams::sampling)},
                      {"split", ghs::derive_seed(o.cfg.seed, ghs::streams::split)},
                      {"shuffle", ghs::derive_seed(o.cfg.seed, ghs::streams::shuffle)},
                      {"dropout", ghs::derive_seed(o.cfg.seed, ghs::streams::dropout)}};
  man.doc["architecture"] = ghs::arch_to_json(arch);
  man.doc["parameters"] = {{"trainable", counts.trainable}, {"non_trainable", counts.non_trainable}};
  man.doc["samples"] = history["samples"];
  man.doc["metrics"] = {{"final_train_loss", res.history.train_loss.back()},
                        {"final_validation_loss", res.history.validation_loss.back()},
                        {"best_epoch", res.best_epoch},
                        {"epochs_run", res.history.train_loss.size()}};
  man.doc["outputs"] = file_records(outputs);
  return loaded.failed() ? kPartial : kOk;
}

double model_divisor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ghs::IoError("cannot open model " + path);
  std::vector<unsigned char> head(8);
  in.read(reinterpret_cast<char*>(head.data()), 8);
  if (in.gcount() == 8) {
    const std::uint32_t len = head[4] | (head[5] << 8) | (head[6] << 16) | (std::uint32_t(head[7]) << 24);
    head.resize(8 + len);
    in.read(reinterpret_cast<char*>(head.data() + 8), len);
    head.resize(8 + static_cast<std::size_t>(in.gcount()));
  }
  const auto h = ghs::decode_model_header(head);
  return h.json.value("normalization_divisor", 10000.0);
}

struct ZoneForPrediction {
  ghs::pipeline::LoadedZone loaded;
  ghs::pipeline::ZoneMosaic mosaic;
  std::vector<ghs::raster::TileIndex> good;
};

ZoneForPrediction load_for_prediction(const fs::path& dir, double divisor) {
  ZoneForPrediction z;
  z.loaded = ghs::pipeline::load_zone(dir, false);
  z.mosaic = ghs::pipeline::make_mosaic(ghs::raster::rescale_reflectance(z.loaded.composite, divisor));
  for (std::size_t k = 0; k < z.loaded.meta.tiles.size(); ++k) {
    if (z.loaded.status[k].ok) z.good.push_back(z.loaded.meta.tiles[k]);
  }
  return z;
}

/// Outcomes in zone-tile order: predicted tiles plus load failures.
std::vector<ghs::pipeline::TileOutcome> merge_outcomes(const ZoneForPrediction& z,
                                                       std::vector<ghs::pipeline::TileOutcome> predicted) {
  std::vector<ghs::pipeline::TileOutcome> out;
  std::size_t next = 0;
  for (std::size_t k = 0; k < z.loaded.meta.tiles.size(); ++k) {
    if (z.loaded.status[k].ok) {
      out.push_back(std::move(predicted[next++]));
    } else {
      ghs::pipeline::TileOutcome o;
      o.tile = z.loaded.meta.tiles[k];
      o.error = z.loaded.status[k].error;
      out.push_back(std::move(o));
    }
  }
  return out;
}

int finish_prediction(const PredictOpts& o, const ZoneForPrediction& z,
                      const std::vector<ghs::pipeline::TileOutcome>& outcomes, json provenance,
                      Manifest& man) {
  const auto written =
      ghs::pipeline::write_predictions(o.out, z.loaded.meta, outcomes, provenance);
  man.lap("write");
  json tiles = json::array();
  std::size_t failed = 0;
  for (const auto& t : outcomes) {
    json e{{"tile", t.tile.name()}, {"status", t.ok() ? "ok" : "error"}};
    if (!t.ok()) {
      e["error"] = t.error;
      ++failed;
    } else {
      e["valid_pixels"] = t.result->valid.count();
    }
    tiles.push_back(e);
  }
  man.doc["tiles"] = tiles;
  auto outputs = written;
  outputs.push_back(fs::path(o.out) / "predictions.json");
  man.doc["outputs"] = file_records(outputs);
  man.doc["metrics"] = {{"tiles_ok", outcomes.size() - failed}, {"tiles_failed", failed}};
  return failed ? kPartial : kOk;
}

int run_predict(const PredictOpts& o, Manifest& man) {
  const auto model = ghs::load_model(o.model);
  const double divisor = o.divisor.value_or(model.arch.normalization_divisor);
  const fs::path dir = fs::path(o.data) / o.zone;
  man.doc["inputs"] = {{"model", file_record(o.model)}, {"zone_dir", dir.generic_string()}};
  const auto z = load_for_prediction(dir, divisor);
  man.lap("load");
  auto predicted = ghs::pipeline::predict_zone(model, z.mosaic, z.good, o.workers);
  man.lap("predict");
  json prov{{"model", o.model}, {"model_zone", model.zone_id}, {"zone", o.zone},
            {"divisor", divisor}, {"mode", "predict"}};
  return finish_prediction(o, z, merge_outcomes(z, std::move(predicted)), prov, man);
}

int run_transfer(const PredictOpts& o, Manifest& man) {
  auto registry = ghs::pipeline::ZoneRegistry::load(o.registry);
  if (!registry.contains(o.source_zone)) {
    throw ghs::RegistryError("no trained model registered for source zone '" + o.source_zone + "'");
  }
  const std::string model_path = registry.at(o.source_zone).model_path;
  double divisor = 0.0;
  try {
    divisor = o.divisor.value_or(model_divisor(model_path));
  } catch (const ghs::IoError& e) {
    throw ghs::RegistryError("model for zone '" + o.source_zone + "' unavailable: " + e.what());
  }
  const fs::path dir = fs::path(o.data) / o.zone;
  man.doc["inputs"] = {{"registry", o.registry}, {"model", file_record(model_path)},
                       {"zone_dir", dir.generic_string()}};
  const auto z = load_for_prediction(dir, divisor);
  man.lap("load");
  auto res = ghs::pipeline::run_transfer(registry, o.source_zone, o.zone, z.mosaic, z.good, o.workers);
  man.lap("predict");
  registry.save(o.registry);
  man.doc["registry_entry"] = {{"zone", o.zone},
                               {"model", res.entry.model_path},
                               {"mode", ghs::pipeline::to_string(res.entry.mode)},
                               {"source_zone", res.entry.source_zone}};
  json prov{{"model", model_path}, {"zone", o.zone}, {"source_zone", o.source_zone},
            {"divisor", divisor}, {"mode", ghs::pipeline::to_string(res.entry.mode)}};
  return finish_prediction(o, z, merge_outcomes(z, std::move(res.tiles)), prov, man);
}

int run_evaluate(const EvaluateOpts& o, Manifest& man) {
  const auto thresholds = parse_thresholds(o.thresholds);
  const auto probs = ghs::pipeline::load_predictions(o.probs);
  const auto meta = ghs::pipeline::read_zone_meta(o.reference);
  if (probs.rows != meta.rows || probs.cols != meta.cols) {
    throw ghs::ShapeError("predictions cover " + std::to_string(probs.rows) + "x" +
                          std::to_string(probs.cols) + " pixels but the reference zone is " +
                          std::to_string(meta.rows) + "x" + std::to_string(meta.cols));
  }
  const auto footprints = ghs::pipeline::load_footprints(o.reference);
  const auto density = ghs::eval::rasterize_density(footprints, ghs::eval::GridFrame::of(meta.frame()));
  const std::vector<std::uint8_t> reference(density.reference.valid);
  man.doc["inputs"] = {{"predictions", file_record(fs::path(o.probs) / "predictions.json")},
                       {"zone_meta", file_record(fs::path(o.reference) / "zone.json")},
                       {"footprints", file_record(fs::path(o.reference) / "footprints.json")}};
  man.lap("load");

  const std::string aoi = o.aoi.empty() ? meta.zone_id : o.aoi;
  ghs::eval::EvaluationReport report;
  report.aois.push_back(ghs::eval::evaluate_aoi(aoi, probs.probability, density.density, reference,
                                                probs.valid, thresholds));
  json doc = ghs::eval::to_json(report);
  doc["warnings"] = density.warnings;
  if (!o.far.empty()) {
    const auto far = ghs::pipeline::load_predictions(o.far);
    if (far.rows != probs.rows || far.cols != probs.cols) {
      throw ghs::ShapeError("far-range predictions do not cover the same pixels");
    }
    ghs::raster::ValidityMask both = probs.valid;
    for (std::size_t i = 0; i < both.valid.size(); ++i) both.valid[i] &= far.valid.valid[i];
    const auto cmp = ghs::pipeline::compare_transfer(probs.probability, far.probability, reference,
                                                     both, thresholds);
    doc["transfer"] = ghs::pipeline::to_json(cmp);
    man.doc["inputs"]["far_predictions"] = file_record(fs::path(o.far) / "predictions.json");
  }
  man.lap("evaluate");

  ghs::pipeline::write_json(o.report, doc);
  std::vector<fs::path> outputs{o.report};
  if (!o.csv.empty()) {
    std::ofstream out(o.csv, std::ios::binary);
    out << ghs::eval::to_csv(report);
    if (!out) throw ghs::IoError("cannot write " + o.csv);
    outputs.emplace_back(o.csv);
  }
  man.doc["outputs"] = file_records(outputs);
  const auto& a = report.aois.front();
  json summary{{"r", a.regression.r}, {"slope", a.regression.slope}};
  for (const auto& t : a.thresholds) {
    std::ostringstream key;
    key << t.threshold;
    summary["thresholds"][key.str()] = {{"overall_accuracy", t.metrics.overall_accuracy},
                                        {"balanced_accuracy", t.metrics.balanced_accuracy},
                                        {"kappa", t.metrics.kappa}};
  }
  man.doc["metrics"] = summary;
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

int run_inspect(const InspectOpts& o, Manifest& man) {
  std::ifstream in(o.file, std::ios::binary);
  if (!in) throw ghs::IoError("cannot open " + o.file);
  const auto size = fs::file_size(o.file);
  std::vector<unsigned char> head(8, 0);
  in.read(reinterpret_cast<char*>(head.data()), 8);
  head.resize(static_cast<std::size_t>(in.gcount()));
  const std::string magic(head.begin(), head.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(4, head.size())));
  json out;
  if (magic == "GHSR") {
    head.resize(ghs::raster::kRasterHeaderSize);
    in.read(reinterpret_cast<char*>(head.data() + 8), static_cast<std::streamsize>(head.size() - 8));
    head.resize(8 + static_cast<std::size_t>(in.gcount()));
    const auto h = ghs::raster::decode_raster_header(head);
    const std::size_t payload = h.width * h.height * h.bands * ghs::raster::dtype_size(h.dtype);
    out = {{"format", "GHSR"},       {"version", h.version},       {"dtype", ghs::raster::to_string(h.dtype)},
           {"bands", h.bands},       {"width", h.width},           {"height", h.height},
           {"nodata", h.nodata},     {"origin_x", h.origin_x},     {"origin_y", h.origin_y},
           {"pixel_size", h.pixel_size}, {"zone_id", h.zone_id},
           {"header_bytes", ghs::raster::kRasterHeaderSize}, {"payload_bytes", payload},
           {"file_bytes", size}};
  } else if (magic == "GHSM") {
    if (head.size() == 8) {
      const std::uint32_t len =
          head[4] | (head[5] << 8) | (head[6] << 16) | (std::uint32_t(head[7]) << 24);
      head.resize(8 + len);
      in.read(reinterpret_cast<char*>(head.data() + 8), len);
      head.resize(8 + static_cast<std::size_t>(in.gcount()));
    }
    const auto h = ghs::decode_model_header(head);
    out = h.json;
    out["payload_offset"] = h.payload_offset;
    out["file_bytes"] = size;
  } else {
    throw ghs::FormatError("unrecognised magic; expected GHSR or GHSM", 0);
  }
  std::cout << out.dump(2) << '\n';
  man.doc["header"] = out;
  return kOk;
}

// ---------------------------------------------------------------- parsing

struct Cli {
  CLI::App app{"Built-up area mapping from 10 m four-band composites with a small CNN", "ghs"};
  SynthOpts synth;
  TrainOpts train;
  PredictOpts predict, transfer;
  EvaluateOpts evaluate;
  InspectOpts inspect;
  ReplayOpts replay;
  std::string manifest;
  double predict_divisor = 0.0, transfer_divisor = 0.0;
  CLI::App *s_synth, *s_train, *s_predict, *s_transfer, *s_evaluate, *s_inspect, *s_replay;

  Cli() {
    app.set_config("--config", "", "TOML/INI file with option defaults; flags override it");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    s_synth = app.add_subcommand("synth", "Generate synthetic zones (composite, labels, footprints)");
    s_synth->add_option("--out", synth.out, "Output directory")->required();
    s_synth->add_option("--zones", synth.zones, "Number of zones (A, B, ...)")->capture_default_str();
    s_synth->add_option("--rows", synth.rows, "Zone rows in pixels")->capture_default_str();
    s_synth->add_option("--cols", synth.cols, "Zone columns in pixels")->capture_default_str();
    s_synth->add_option("--tile-size", synth.tile_size, "Tile side in pixels")->capture_default_str();
    s_synth->add_option("--seed", synth.seed, "Scene seed of zone A; zone k uses seed+k")->capture_default_str();
    s_synth->add_option("--clusters", synth.scene.clusters, "Settlement clusters per zone")->capture_default_str();
    s_synth->add_option("--buildings-per-cluster", synth.scene.buildings_per_cluster)->capture_default_str();
    s_synth->add_option("--cluster-radius", synth.scene.cluster_radius_px, "Cluster spread in pixels")->capture_default_str();
    s_synth->add_option("--building-min", synth.scene.building_min_px, "Minimum building side (px)")->capture_default_str();
    s_synth->add_option("--building-max", synth.scene.building_max_px, "Maximum building side (px)")->capture_default_str();
    s_synth->add_option("--noise", synth.scene.noise_sigma, "Band noise sigma (DN)")->capture_default_str();
    s_synth->add_option("--nodata-fraction", synth.scene.nodata_fraction)->capture_default_str();
    s_synth->add_option("--pixel-size", synth.scene.pixel_size, "Pixel size in metres")->capture_default_str();

    s_train = app.add_subcommand("train", "Train a per-zone model");
    s_train->add_option("--zone", train.zone, "Zone id")->required();
    s_train->add_option("--data", train.data, "Data root holding <zone>/zone.json")->required();
    s_train->add_option("--out", train.out, "Model file (.ghsm)")->required();
    s_train->add_option("--preset", train.preset, "Architecture preset")
        ->check(CLI::IsMember({"desk", "paper"}))->capture_default_str();
    s_train->add_option("--epochs", train.cfg.epochs)->capture_default_str();
    s_train->add_option("--seed", train.cfg.seed, "Training seed")->capture_default_str();
    s_train->add_option("--non-bu-rate", train.cfg.non_bu_rate, "Keep rate of non-built-up patches")->capture_default_str();
    s_train->add_option("--tile-fraction", train.cfg.tile_fraction, "Fraction of tiles used for training")->capture_default_str();
    s_train->add_option("--chunk-size", train.cfg.chunk_size, "Samples per shuffled chunk")->capture_default_str();
    s_train->add_option("--batch-size", train.cfg.batch_size, "Optimizer batch size")->capture_default_str();
    s_train->add_option("--learning-rate", train.cfg.learning_rate)->capture_default_str();
    s_train->add_option("--validation-fraction", train.cfg.validation_fraction)->capture_default_str();
    s_train->add_option("--bn-recalibration", train.cfg.bn_recalibration_samples,
                        "Patches used to reset batch-norm statistics each epoch (0: off)")->capture_default_str();
    s_train->add_option("--divisor", train.divisor, "Reflectance divisor")->capture_default_str();
    s_train->add_flag("--early-stopping", train.early_stopping, "Stop on validation loss plateau");
    s_train->add_option("--patience", train.patience)->capture_default_str();
    s_train->add_option("--min-delta", train.min_delta)->capture_default_str();
    s_train->add_option("--history", train.history, "History JSON (default <out>.history.json)");
    s_train->add_option("--registry", train.registry, "Record the model in this zone registry");

    auto add_predict_opts = [](CLI::App* s, PredictOpts& p, double& divisor) {
      s->add_option("--zone", p.zone, "Target zone id")->required();
      s->add_option("--data", p.data, "Data root holding <zone>/zone.json")->required();
      s->add_option("--out", p.out, "Output directory for probability tiles")->required();
      s->add_option("--workers", p.workers, "Tile worker threads")->capture_default_str()
          ->check(CLI::Range(1u, 256u));
      s->add_option("--divisor", divisor, "Reflectance divisor (default: the model's)");
    };
    s_predict = app.add_subcommand("predict", "Predict built-up probability for every tile of a zone");
    s_predict->add_option("--model", predict.model, "Model file (.ghsm)")->required();
    add_predict_opts(s_predict, predict, predict_divisor);

    s_transfer = app.add_subcommand("transfer", "Predict a zone with another zone's registered model");
    s_transfer->add_option("--registry", transfer.registry, "Zone registry JSON")->required();
    s_transfer->add_option("--source-zone", transfer.source_zone, "Zone whose model is applied")->required();
    add_predict_opts(s_transfer, transfer, transfer_divisor);

    s_evaluate = app.add_subcommand("evaluate", "Score predictions against reference footprints");
    s_evaluate->add_option("--probs", evaluate.probs, "Prediction directory")->required();
    s_evaluate->add_option("--reference", evaluate.reference, "Zone directory with footprints.json")->required();
    s_evaluate->add_option("--thresholds", evaluate.thresholds, "Comma-separated cut-offs")->capture_default_str();
    s_evaluate->add_option("--report", evaluate.report, "Report JSON")->required();
    s_evaluate->add_option("--csv", evaluate.csv, "Per-AOI CSV rows");
    s_evaluate->add_option("--far", evaluate.far, "Far-range prediction directory for a transfer comparison");
    s_evaluate->add_option("--aoi", evaluate.aoi, "AOI id (default: zone id)");

    s_inspect = app.add_subcommand("inspect", "Print the header of a GHSR or GHSM file");
    s_inspect->add_option("file", inspect.file, "Raster or model file")->required();

    s_replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    s_replay->add_option("recorded", replay.manifest, "Manifest JSON")->required();

    for (auto* s : {s_synth, s_train, s_predict, s_transfer, s_evaluate, s_inspect, s_replay}) {
      s->add_option("--manifest", manifest, "Run manifest path");
    }
  }

  CLI::App* chosen() const {
    for (auto* s : {s_synth, s_train, s_predict, s_transfer, s_evaluate, s_inspect, s_replay}) {
      if (s->parsed()) return s;
    }
    return nullptr;
  }

  fs::path default_manifest(const CLI::App* s) const {
    if (!manifest.empty()) return manifest;
    if (s == s_synth) return fs::path(synth.out) / "synth.manifest.json";
    if (s == s_train) return train.out + ".manifest.json";
    if (s == s_predict) return fs::path(predict.out) / "manifest.json";
    if (s == s_transfer) return fs::path(transfer.out) / "manifest.json";
    if (s == s_evaluate) return evaluate.report + ".manifest.json";
    return {};
  }
};

int run(int argc, const char* const* argv);

/// Rebuilds the argument list from a manifest's command and config echo.
int run_replay(const std::string& recorded, const std::string& manifest_override) {
  const auto doc = ghs::pipeline::read_json(recorded);
  if (!doc.contains("command") || !doc.contains("config")) {
    throw ghs::FormatError("manifest lacks command/config", 0);
  }
  std::vector<std::string> args{"ghs", doc.at("command").get<std::string>()};
  for (const auto& [key, value] : doc.at("config").items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
      continue;
    }
    const bool positional = key == "file";
    if (!positional) args.push_back("--" + key);
    if (value.is_array()) {
      for (const auto& v : value) args.push_back(v.get<std::string>());
    } else {
      args.push_back(value.get<std::string>());
    }
  }
  if (!manifest_override.empty()) {
    args.push_back("--manifest");
    args.push_back(manifest_override);
  }
  std::vector<const char*> raw;
  for (const auto& a : args) raw.push_back(a.c_str());
  return run(static_cast<int>(raw.size()), raw.data());
}

int run(int argc, const char* const* argv) {
  Cli cli;
  try {
    cli.app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return cli.app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ghs: error[usage]: " << e.what() << "\nRun with --help for more information.\n";
    return kUsage;
  }
  CLI::App* sub = cli.chosen();
  if (sub == cli.s_replay) {
    try {
      return run_replay(cli.replay.manifest, cli.manifest);
    } catch (const ghs::Error& e) {
      std::cerr << "ghs: error[" << ghs::to_string(e.kind()) << "]: " << e.what() << '\n';
      return exit_code(e.kind());
    }
  }

  Manifest man;
  man.path = cli.default_manifest(sub);
  man.doc = {{"tool", "ghs"}, {"version", kVersion}, {"command", sub->get_name()},
             {"argv", std::vector<std::string>(argv + 1, argv + argc)},
             {"config", echo_config(*sub)}, {"status", "running"}};
  if (sub == cli.s_predict && sub->get_option("--divisor")->count() > 0) {
    cli.predict.divisor = cli.predict_divisor;
  } else if (sub == cli.s_transfer && sub->get_option("--divisor")->count() > 0) {
    cli.transfer.divisor = cli.transfer_divisor;
  }

  int code = kInternal;
  std::string error_class, message;
  try {
    if (sub == cli.s_synth) code = run_synth(cli.synth, man);
    else if (sub == cli.s_train) code = run_train(cli.train, man);
    else if (sub == cli.s_predict) code = run_predict(cli.predict, man);
    else if (sub == cli.s_transfer) code = run_transfer(cli.transfer, man);
    else if (sub == cli.s_evaluate) code = run_evaluate(cli.evaluate, man);
    else if (sub == cli.s_inspect) code = run_inspect(cli.inspect, man);
  } catch (const ghs::Error& e) {
    error_class = ghs::to_string(e.kind());
    message = e.what();
    code = exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    error_class = "io";
    message = e.what();
    code = kIo;
  } catch (const nlohmann::json::exception& e) {
    error_class = "format";
    message = e.what();
    code = kFormat;
  } catch (const std::exception& e) {
    error_class = "internal";
    message = e.what();
    code = kInternal;
  }
  if (code == kOk) {
    man.doc["status"] = "ok";
  } else if (code == kPartial) {
    man.doc["status"] = "partial";
    std::cerr << "ghs: warning: some tiles failed; see " << man.path.generic_string() << '\n';
  } else {
    man.doc["status"] = "error";
    man.doc["error"] = {{"class", error_class}, {"message", message}, {"exit_code", code}};
    std::cerr << "ghs: error[" << error_class << "]: " << message << '\n';
  }
  man.doc["exit_code"] = code;
  try {
    man.write();
  } catch (const std::exception& e) {
    std::cerr << "ghs: warning: manifest not written: " << e.what() << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
