#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>

#include "ghs/error.hpp"

namespace ghs::nn {

/// Gradient magnitudes below this floor are compared absolutely; above it
/// the comparison is relative.
inline constexpr double kGradCheckFloor = 1e-4;

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / scale;
}

/// Worst relative error between `analytic` and central finite differences
/// of `loss` taken by perturbing each entry of `params` by ±step. `params`
/// is restored before returning.
template <typename T>
double grad_check(const std::function<double()>& loss, std::span<T> params,
                  std::span<const T> analytic, double step) {
  if (!(step >= 1e-6 && step <= 1e-3)) {
    throw ConfigError("grad_check step must lie in [1e-6, 1e-3], got " + std::to_string(step));
  }
  if (params.size() != analytic.size()) {
    throw ShapeError("grad_check: parameter and gradient lengths differ");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T saved = params[i];
    params[i] = static_cast<T>(saved + step);
    const double up = loss();
    params[i] = static_cast<T>(saved - step);
    const double down = loss();
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    worst = std::max(worst, relative_error(static_cast<double>(analytic[i]), numeric));
  }
  return worst;
}

}  // namespace ghs::nn
