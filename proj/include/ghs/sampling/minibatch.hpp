#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "ghs/error.hpp"
#include "ghs/rng.hpp"

namespace ghs::sampling {

/// One epoch of optimizer batches over sample indices [0, count): a full
/// shuffle, then chunks of `chunk_size`, each split into `optimizer_batch`
/// slices (the last slice of a chunk may be short).
inline std::vector<std::vector<std::size_t>> shuffle_minibatches(std::size_t count,
                                                                 std::size_t chunk_size,
                                                                 std::size_t optimizer_batch,
                                                                 Rng& rng) {
  if (optimizer_batch == 0 || chunk_size < optimizer_batch) {
    throw ConfigError("chunk size (" + std::to_string(chunk_size) +
                      ") must be at least the optimizer batch (" +
                      std::to_string(optimizer_batch) + ") and both positive");
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Fisher-Yates with our own uniform draw keeps the order portable.
  for (std::size_t i = count; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t c0 = 0; c0 < count; c0 += chunk_size) {
    const std::size_t c1 = std::min(count, c0 + chunk_size);
    for (std::size_t b0 = c0; b0 < c1; b0 += optimizer_batch) {
      const std::size_t b1 = std::min(c1, b0 + optimizer_batch);
      batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b0),
                           order.begin() + static_cast<std::ptrdiff_t>(b1));
    }
  }
  return batches;
}

}  // namespace ghs::sampling
