#pragma once

// GHSM model file:
//   "GHSM" | u32 LE header length | UTF-8 JSON header | f32 LE blobs
// Blobs follow build order (conv kernels [out][in][kh][kw], dense [out][in],
// batch norm gamma, beta, moving mean, moving variance).

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghs/bytes.hpp"
#include "ghs/error.hpp"
#include "ghs/model/network.hpp"

namespace ghs {

inline constexpr char kModelMagic[4] = {'G', 'H', 'S', 'M'};
inline constexpr std::uint32_t kModelVersion = 1;

inline nlohmann::json arch_to_json(const ArchitectureConfig& a) {
  return {
      {"patch_size", a.patch_size},
      {"bands", a.bands},
      {"block_filters", {a.block_filters.first, a.block_filters.second}},
      {"hidden_units", a.hidden_units},
      {"dropout_rate", a.dropout_rate},
      {"normalization_divisor", a.normalization_divisor},
      {"bn_epsilon", a.bn_epsilon},
      {"bn_momentum", a.bn_momentum},
      {"bn_placement", "after_tanh_conv"},
  };
}

inline ArchitectureConfig arch_from_json(const nlohmann::json& j) {
  ArchitectureConfig a;
  a.patch_size = j.at("patch_size").get<std::size_t>();
  a.bands = j.at("bands").get<std::size_t>();
  a.block_filters = {j.at("block_filters").at(0).get<std::size_t>(),
                     j.at("block_filters").at(1).get<std::size_t>()};
  a.hidden_units = j.at("hidden_units").get<std::size_t>();
  a.dropout_rate = j.at("dropout_rate").get<double>();
  a.normalization_divisor = j.at("normalization_divisor").get<double>();
  a.bn_epsilon = j.at("bn_epsilon").get<double>();
  a.bn_momentum = j.at("bn_momentum").get<double>();
  return a;
}

inline nlohmann::json model_header(const ModelParameters& m) {
  const auto counts = count_params(m.arch);
  return {
      {"format", "GHSM"},
      {"version", kModelVersion},
      {"arch", arch_to_json(m.arch)},
      {"zone_id", m.zone_id},
      {"seed", m.seed},
      {"epochs", m.epochs},
      {"normalization_divisor", m.arch.normalization_divisor},
      {"trainable_parameters", counts.trainable},
      {"non_trainable_parameters", counts.non_trainable},
  };
}

inline std::vector<unsigned char> encode_model(const ModelParameters& m) {
  bytes::Writer w;
  w.put_string(std::string(kModelMagic, 4));
  const std::string header = model_header(m).dump();
  w.put(static_cast<std::uint32_t>(header.size()));
  w.put_string(header);
  m.for_each_blob([&](const char*, std::span<const float> blob, bool) {
    for (float v : blob) w.put(v);
  });
  return w.take();
}

/// Header fields only; the parameter payload is not touched.
struct ModelHeader {
  nlohmann::json json;
  std::size_t payload_offset = 0;
};

inline ModelHeader decode_model_header(std::span<const unsigned char> data) {
  bytes::Reader r(data);
  if (r.get_string(4, "magic") != std::string(kModelMagic, 4)) {
    throw FormatError("bad model magic (expected \"GHSM\")", 0);
  }
  const auto len = r.get<std::uint32_t>("header length");
  const std::size_t header_at = r.position();
  const std::string text = r.get_string(len, "JSON header");
  ModelHeader h;
  try {
    h.json = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model header JSON: ") + e.what(), header_at);
  }
  if (!h.json.is_object() || h.json.value("format", "") != "GHSM") {
    throw FormatError("model header lacks format \"GHSM\"", header_at);
  }
  if (h.json.value("version", 0u) != kModelVersion) {
    throw FormatError("unsupported model version " + h.json.value("version", nlohmann::json()).dump(),
                      header_at);
  }
  h.payload_offset = r.position();
  return h;
}

inline ModelParameters decode_model(std::span<const unsigned char> data) {
  const auto h = decode_model_header(data);
  ModelParameters m;
  try {
    m = make_network<float>(arch_from_json(h.json.at("arch")));
    m.zone_id = h.json.at("zone_id").get<std::string>();
    m.seed = h.json.at("seed").get<std::uint64_t>();
    m.epochs = h.json.at("epochs").get<std::uint32_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid model header field: ") + e.what(), 8);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid architecture in header: ") + e.what(), 8);
  }
  bytes::Reader r(data.subspan(h.payload_offset));
  m.for_each_blob([&](const char* name, std::span<float> blob, bool) {
    for (auto& v : blob) {
      try {
        v = r.get<float>(name);
      } catch (const FormatError&) {
        throw FormatError(std::string("truncated parameter blob ") + name,
                          h.payload_offset + r.position());
      }
    }
  });
  if (r.remaining() != 0) {
    throw FormatError("unexpected trailing bytes after parameters", h.payload_offset + r.position());
  }
  return m;
}

inline void save_model(const ModelParameters& m, const std::string& path) {
  bytes::write_file(path, encode_model(m));
}

inline ModelParameters load_model(const std::string& path) {
  return decode_model(bytes::read_file(path));
}

}  // namespace ghs
