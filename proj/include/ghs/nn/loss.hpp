#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ghs/error.hpp"

namespace ghs::nn {

inline constexpr double kProbabilityClip = 1e-7;

struct LossValue {
  double value = 0.0;
  std::vector<double> gradient;  // d(value)/d(y_pred), one per prediction
};

/// Mean binary cross-entropy. Predictions are clipped to
/// [1e-7, 1 - 1e-7] before the logs; the gradient is evaluated at the
/// clipped prediction.
template <typename T, typename U>
LossValue bce_loss(std::span<const T> y_true, std::span<const U> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ShapeError("bce_loss: " + std::to_string(y_true.size()) + " labels vs " +
                     std::to_string(y_pred.size()) + " predictions");
  }
  LossValue out;
  const std::size_t n = y_true.size();
  if (n == 0) return out;
  out.gradient.resize(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = static_cast<double>(y_true[i]);
    const double p = std::clamp(static_cast<double>(y_pred[i]), kProbabilityClip,
                                1.0 - kProbabilityClip);
    total -= y * std::log(p) + (1.0 - y) * std::log1p(-p);
    out.gradient[i] = inv_n * (p - y) / (p * (1.0 - p));
  }
  out.value = total * inv_n;
  return out;
}

template <typename T, typename U>
LossValue bce_loss(const std::vector<T>& y_true, const std::vector<U>& y_pred) {
  return bce_loss(std::span<const T>(y_true), std::span<const U>(y_pred));
}

}  // namespace ghs::nn
