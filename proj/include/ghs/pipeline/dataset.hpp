#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghs/error.hpp"
#include "ghs/eval/footprints.hpp"
#include "ghs/pipeline/predict.hpp"
#include "ghs/raster/grid.hpp"
#include "ghs/raster/io.hpp"
#include "ghs/raster/ops.hpp"
#include "ghs/raster/tiles.hpp"

// On-disk zone layout:
//   <dir>/zone.json                         extent, georeference, tile list
//   <dir>/footprints.json                   reference rectangles (optional)
//   <dir>/tiles/<tile>.composite.ghsr       i16 reflectance, 4 bands
//   <dir>/tiles/<tile>.labels.ghsr          u8 built-up mask
// Prediction output directories mirror it with <tile>.prob.ghsr (f32) and
// <tile>.q8.ghsr (u8 percent, 255 nodata) plus predictions.json.

namespace ghs::pipeline {

namespace fs = std::filesystem;

struct ZoneMeta {
  std::string zone_id;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t bands = 0;
  std::size_t tile_pixels = 0;
  double pixel_size = 10.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  std::vector<raster::TileIndex> tiles;
  nlohmann::json extra = nlohmann::json::object();

  raster::RasterGrid frame() const {
    raster::RasterGrid g;
    g.width = cols;
    g.height = rows;
    g.zone_id = zone_id;
    g.origin_x = origin_x;
    g.origin_y = origin_y;
    g.pixel_size = pixel_size;
    return g;
  }
};

inline nlohmann::json to_json(const raster::TileIndex& t) {
  return {{"name", t.name()}, {"tile_row", t.tile_row}, {"tile_col", t.tile_col},
          {"row0", t.row0},   {"col0", t.col0},         {"rows", t.rows},
          {"cols", t.cols}};
}

inline raster::TileIndex tile_from_json(const nlohmann::json& j) {
  raster::TileIndex t;
  t.tile_row = j.at("tile_row").get<std::size_t>();
  t.tile_col = j.at("tile_col").get<std::size_t>();
  t.row0 = j.at("row0").get<std::size_t>();
  t.col0 = j.at("col0").get<std::size_t>();
  t.rows = j.at("rows").get<std::size_t>();
  t.cols = j.at("cols").get<std::size_t>();
  return t;
}

inline nlohmann::json to_json(const ZoneMeta& m) {
  nlohmann::json tiles = nlohmann::json::array();
  for (const auto& t : m.tiles) tiles.push_back(to_json(t));
  return {{"zone_id", m.zone_id},       {"rows", m.rows},         {"cols", m.cols},
          {"bands", m.bands},           {"tile_pixels", m.tile_pixels},
          {"pixel_size", m.pixel_size}, {"origin_x", m.origin_x}, {"origin_y", m.origin_y},
          {"tiles", tiles},             {"extra", m.extra}};
}

inline nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what(), 0);
  }
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

inline ZoneMeta zone_meta_from_json(const nlohmann::json& j) {
  try {
    ZoneMeta m;
    m.zone_id = j.at("zone_id").get<std::string>();
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
    m.bands = j.at("bands").get<std::size_t>();
    m.tile_pixels = j.at("tile_pixels").get<std::size_t>();
    m.pixel_size = j.at("pixel_size").get<double>();
    m.origin_x = j.at("origin_x").get<double>();
    m.origin_y = j.at("origin_y").get<double>();
    for (const auto& t : j.at("tiles")) m.tiles.push_back(tile_from_json(t));
    if (j.contains("extra")) m.extra = j.at("extra");
    for (const auto& t : m.tiles) {
      if (t.row0 + t.rows > m.rows || t.col0 + t.cols > m.cols) {
        throw FormatError("tile " + t.name() + " exceeds the zone extent", 0);
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("zone metadata: ") + e.what(), 0);
  }
}

inline ZoneMeta read_zone_meta(const fs::path& dir) {
  return zone_meta_from_json(read_json(dir / "zone.json"));
}

inline fs::path tile_path(const fs::path& dir, const raster::TileIndex& t, const std::string& kind) {
  return dir / "tiles" / (t.name() + "." + kind + ".ghsr");
}

/// Rows and columns [t.row0, t.row0+t.rows) × [t.col0, t.col0+t.cols) of `g`.
inline raster::RasterGrid crop(const raster::RasterGrid& g, const raster::TileIndex& t) {
  raster::RasterGrid out = g.like(t.cols, t.rows, g.bands, g.dtype);
  out.origin_x = g.origin_x + static_cast<double>(t.col0) * g.pixel_size;
  out.origin_y = g.origin_y - static_cast<double>(t.row0) * g.pixel_size;
  for (std::size_t b = 0; b < g.bands; ++b)
    for (std::size_t r = 0; r < t.rows; ++r)
      for (std::size_t c = 0; c < t.cols; ++c) out.at(b, r, c) = g.at(b, t.row0 + r, t.col0 + c);
  return out;
}

inline void paste(raster::RasterGrid& dst, const raster::RasterGrid& src, const raster::TileIndex& t) {
  if (src.width != t.cols || src.height != t.rows || src.bands != dst.bands) {
    throw ShapeError("tile " + t.name() + " is " + std::to_string(src.width) + "x" +
                     std::to_string(src.height) + "x" + std::to_string(src.bands) + ", expected " +
                     std::to_string(t.cols) + "x" + std::to_string(t.rows) + "x" +
                     std::to_string(dst.bands));
  }
  for (std::size_t b = 0; b < src.bands; ++b)
    for (std::size_t r = 0; r < t.rows; ++r)
      for (std::size_t c = 0; c < t.cols; ++c) dst.at(b, t.row0 + r, t.col0 + c) = src.at(b, r, c);
}

/// Writes a zone as tiles and returns the paths written.
inline std::vector<fs::path> write_zone(const fs::path& dir, ZoneMeta meta,
                                        const raster::RasterGrid& composite,
                                        const raster::RasterGrid& labels,
                                        const eval::FootprintSet* footprints = nullptr) {
  fs::create_directories(dir / "tiles");
  meta.rows = composite.height;
  meta.cols = composite.width;
  meta.bands = composite.bands;
  meta.pixel_size = composite.pixel_size;
  meta.origin_x = composite.origin_x;
  meta.origin_y = composite.origin_y;
  std::vector<fs::path> written;
  for (const auto& t : meta.tiles) {
    const auto cp = tile_path(dir, t, "composite");
    const auto lp = tile_path(dir, t, "labels");
    raster::write_raster(crop(composite, t), cp.string());
    raster::write_raster(crop(labels, t), lp.string());
    written.push_back(cp);
    written.push_back(lp);
  }
  if (footprints) {
    write_json(dir / "footprints.json", eval::to_json(*footprints));
    written.push_back(dir / "footprints.json");
  }
  write_json(dir / "zone.json", to_json(meta));
  written.push_back(dir / "zone.json");
  return written;
}

struct TileStatus {
  std::string tile;
  bool ok = true;
  std::string error;
};

inline nlohmann::json to_json(const TileStatus& s) {
  nlohmann::json j{{"tile", s.tile}, {"status", s.ok ? "ok" : "error"}};
  if (!s.ok) j["error"] = s.error;
  return j;
}

/// A zone read back from tiles. Tiles that fail to load are reported and
/// their area is left as nodata, so the rest of the zone stays usable.
struct LoadedZone {
  ZoneMeta meta;
  raster::RasterGrid composite;
  raster::RasterGrid labels;
  std::vector<TileStatus> status;

  std::size_t failed() const {
    std::size_t n = 0;
    for (const auto& s : status) n += !s.ok;
    return n;
  }
};

inline LoadedZone load_zone(const fs::path& dir, bool with_labels = true) {
  LoadedZone z;
  z.meta = read_zone_meta(dir);
  const auto& m = z.meta;
  z.composite = raster::RasterGrid(m.cols, m.rows, m.bands, raster::DType::i16, -32768.0, -32768.0f);
  z.labels = raster::RasterGrid(m.cols, m.rows, 1, raster::DType::u8, 255.0, 255.0f);
  for (auto* g : {&z.composite, &z.labels}) {
    g->zone_id = m.zone_id;
    g->origin_x = m.origin_x;
    g->origin_y = m.origin_y;
    g->pixel_size = m.pixel_size;
  }
  for (const auto& t : m.tiles) {
    TileStatus s{t.name(), true, {}};
    try {
      const auto comp = raster::read_raster(tile_path(dir, t, "composite").string());
      if (comp.dtype != raster::DType::i16) throw FormatError("composite must be i16", 0);
      raster::RasterGrid lab;
      if (with_labels) lab = raster::read_raster(tile_path(dir, t, "labels").string());
      paste(z.composite, comp, t);
      if (with_labels) paste(z.labels, lab, t);
    } catch (const Error& e) {
      s.ok = false;
      s.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
    z.status.push_back(std::move(s));
  }
  return z;
}

inline eval::FootprintSet load_footprints(const fs::path& dir) {
  try {
    return eval::footprints_from_json(read_json(dir / "footprints.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("footprints: ") + e.what(), 0);
  }
}

/// Writes <tile>.prob.ghsr and <tile>.q8.ghsr for every successful tile plus
/// predictions.json describing the run. Returns the raster paths written.
inline std::vector<fs::path> write_predictions(const fs::path& dir, const ZoneMeta& meta,
                                               const std::vector<TileOutcome>& outcomes,
                                               const nlohmann::json& provenance = nlohmann::json::object()) {
  fs::create_directories(dir / "tiles");
  const auto frame = meta.frame();
  std::vector<fs::path> written;
  nlohmann::json tiles = nlohmann::json::array();
  for (const auto& o : outcomes) {
    auto entry = to_json(o.tile);
    if (o.ok()) {
      const auto prob = o.result->to_raster(frame);
      const auto q8 = raster::quantize_probability(prob, o.result->valid);
      const auto pp = tile_path(dir, o.tile, "prob");
      const auto qp = tile_path(dir, o.tile, "q8");
      raster::write_raster(prob, pp.string());
      raster::write_raster(q8, qp.string());
      written.push_back(pp);
      written.push_back(qp);
      entry["status"] = "ok";
    } else {
      entry["status"] = "error";
      entry["error"] = o.error;
    }
    tiles.push_back(entry);
  }
  auto out_meta = meta;
  out_meta.bands = 1;
  auto j = to_json(out_meta);
  j["tiles"] = tiles;
  j["provenance"] = provenance;
  write_json(dir / "predictions.json", j);
  return written;
}

/// Zone-sized probability surface read back from a prediction directory.
inline ZoneProbability load_predictions(const fs::path& dir) {
  const auto j = read_json(dir / "predictions.json");
  const auto meta = zone_meta_from_json(j);
  ZoneProbability z{meta.rows, meta.cols, std::vector<float>(meta.rows * meta.cols, 0.0f),
                    raster::ValidityMask(meta.cols, meta.rows, false)};
  for (std::size_t k = 0; k < meta.tiles.size(); ++k) {
    if (j.at("tiles")[k].value("status", "error") != "ok") continue;
    const auto& t = meta.tiles[k];
    const auto g = raster::read_raster(tile_path(dir, t, "prob").string());
    if (g.width != t.cols || g.height != t.rows || g.bands != 1) {
      throw ShapeError("probability tile " + t.name() + " does not match its index entry");
    }
    for (std::size_t r = 0; r < t.rows; ++r)
      for (std::size_t c = 0; c < t.cols; ++c) {
        const float v = g.at(0, r, c);
        if (g.is_nodata(v)) continue;
        const std::size_t i = (t.row0 + r) * meta.cols + t.col0 + c;
        z.probability[i] = v;
        z.valid.valid[i] = 1;
      }
  }
  return z;
}

}  // namespace ghs::pipeline
