#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ghs/error.hpp"

namespace ghs::nn {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-4;

  AdamState() = default;
  AdamState(std::size_t parameters, double lr)
      : m(parameters, 0.0), v(parameters, 0.0), learning_rate(lr) {}
};

/// One bias-corrected Adam update in place. Gradients are validated before
/// any state changes, so a rejected step leaves params and state untouched.
template <typename T, typename G>
void adam_step(std::span<T> params, std::span<const G> grads, AdamState& state) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("adam_step: params (" + std::to_string(params.size()) + "), grads (" +
                     std::to_string(grads.size()) + ") and state (" +
                     std::to_string(state.m.size()) + ") differ in length");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(static_cast<double>(grads[i]))) {
      throw NumericError("adam_step: non-finite gradient at parameter index " +
                         std::to_string(i));
    }
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = static_cast<double>(grads[i]);
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    const double update = state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    params[i] = static_cast<T>(static_cast<double>(params[i]) - update);
  }
}

template <typename T, typename G>
void adam_step(std::vector<T>& params, const std::vector<G>& grads, AdamState& state) {
  adam_step(std::span<T>(params), std::span<const G>(grads), state);
}

}  // namespace ghs::nn
