#pragma once

#include <span>

#include "ghs/rng.hpp"

namespace ghs::nn {

inline constexpr double kInitBound = 0.1065;

/// Fills `values` with i.i.d. draws from U[-bound, bound].
template <typename T>
void fill_uniform(std::span<T> values, Rng& rng, double bound = kInitBound) {
  for (auto& v : values) v = static_cast<T>((2.0 * uniform01(rng) - 1.0) * bound);
}

}  // namespace ghs::nn
