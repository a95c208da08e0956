#pragma once

#include <string>
#include <vector>

#include "ghs/error.hpp"
#include "ghs/nn/tensor.hpp"
#include "ghs/rng.hpp"

namespace ghs::nn {

inline void check_dropout_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
}

/// Inverted dropout. In train mode each unit is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate); `mask` receives the
/// per-unit multiplier. Infer mode is the identity and draws nothing.
template <typename T>
Batch<T> dropout(const Batch<T>& in, double rate, Rng& rng, Mode mode,
                 std::vector<T>* mask = nullptr) {
  check_dropout_rate(rate);
  if (mode == Mode::infer || rate == 0.0) {
    if (mask) mask->assign(in.data.size(), T(1));
    return in;
  }
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  Batch<T> out = in;
  std::vector<T> local;
  std::vector<T>& m = mask ? *mask : local;
  m.resize(in.data.size());
  for (std::size_t i = 0; i < in.data.size(); ++i) {
    m[i] = uniform01(rng) < rate ? T(0) : keep_scale;
    out.data[i] *= m[i];
  }
  return out;
}

template <typename T>
Batch<T> dropout_backward(const Batch<T>& grad_out, const std::vector<T>& mask) {
  if (mask.size() != grad_out.data.size()) {
    throw ShapeError("dropout_backward: mask size does not match gradient");
  }
  Batch<T> g = grad_out;
  for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] *= mask[i];
  return g;
}

}  // namespace ghs::nn
