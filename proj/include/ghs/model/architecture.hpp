#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "ghs/error.hpp"

namespace ghs {

/// Declarative GHS-S2Net topology: two 2DCONV blocks (linear 2×2 conv,
/// tanh 2×2 conv, batch norm, dropout) followed by a tanh hidden layer and a
/// single sigmoid output. The 5×5 input shrinks 5→4→3→2→1 spatially.
struct ArchitectureConfig {
  std::size_t patch_size = 5;
  std::size_t bands = 4;
  std::pair<std::size_t, std::size_t> block_filters{32, 64};
  std::size_t hidden_units = 128;
  double dropout_rate = 0.1;
  double normalization_divisor = 10000.0;
  double bn_epsilon = 1e-3;
  double bn_momentum = 0.99;

  static constexpr std::size_t kConvLayers = 4;
  static constexpr std::size_t kDenseLayers = 2;

  static ArchitectureConfig desk() { return {}; }

  static ArchitectureConfig paper() {
    ArchitectureConfig a;
    a.block_filters = {128, 256};
    a.hidden_units = 512;
    return a;
  }

  static ArchitectureConfig preset(const std::string& name) {
    if (name == "desk") return desk();
    if (name == "paper") return paper();
    throw ConfigError("unknown architecture preset '" + name + "' (expected desk or paper)");
  }

  /// Spatial extent reaching the flatten layer; four valid 2×2 convolutions.
  std::size_t flatten_side() const { return patch_size - kConvLayers; }
  std::size_t flatten_width() const {
    return flatten_side() * flatten_side() * block_filters.second;
  }

  void validate() const {
    if (patch_size != 5) {
      throw ConfigError("patch_size must be 5, got " + std::to_string(patch_size));
    }
    if (bands == 0) throw ConfigError("bands must be at least 1");
    if (block_filters.first == 0 || block_filters.second == 0) {
      throw ConfigError("block filter counts must be at least 1");
    }
    if (hidden_units == 0) throw ConfigError("hidden_units must be at least 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
      throw ConfigError("dropout_rate must lie in [0, 1)");
    }
    if (!(normalization_divisor > 0.0)) {
      throw ConfigError("normalization_divisor must be positive");
    }
    if (!(bn_epsilon > 0.0)) throw ConfigError("bn_epsilon must be positive");
    if (!(bn_momentum > 0.0 && bn_momentum < 1.0)) {
      throw ConfigError("bn_momentum must lie in (0, 1)");
    }
  }

  bool operator==(const ArchitectureConfig&) const = default;
};

struct ParameterCount {
  std::size_t trainable = 0;
  std::size_t non_trainable = 0;
  std::size_t total() const { return trainable + non_trainable; }
  bool operator==(const ParameterCount&) const = default;
};

/// Closed-form count: conv (k·k·in+1)·out, batch norm 2·ch trainable plus
/// 2·ch moving statistics, dense (in+1)·out.
inline ParameterCount count_params(const ArchitectureConfig& arch) {
  arch.validate();
  const std::size_t k = 2 * 2;
  const auto [fa, fb] = arch.block_filters;
  auto conv = [k](std::size_t in, std::size_t out) { return (k * in + 1) * out; };
  auto dense = [](std::size_t in, std::size_t out) { return (in + 1) * out; };

  ParameterCount c;
  c.trainable = conv(arch.bands, fa) + conv(fa, fa) + 2 * fa + conv(fa, fb) + conv(fb, fb) +
                2 * fb + dense(arch.flatten_width(), arch.hidden_units) +
                dense(arch.hidden_units, 1);
  c.non_trainable = 2 * fa + 2 * fb;
  return c;
}

}  // namespace ghs
