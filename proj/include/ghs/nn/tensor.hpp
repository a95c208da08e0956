#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ghs/error.hpp"

namespace ghs::nn {

enum class Mode { train, infer };

/// Single H×W×C block, row-major [row][col][channel].
template <typename T>
struct Tensor3 {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<T> data;

  Tensor3() = default;
  Tensor3(std::size_t h, std::size_t w, std::size_t c, T fill = T(0))
      : height(h), width(w), channels(c), data(h * w * c, fill) {}

  T& operator()(std::size_t r, std::size_t c, std::size_t ch) {
    return data[(r * width + c) * channels + ch];
  }
  T operator()(std::size_t r, std::size_t c, std::size_t ch) const {
    return data[(r * width + c) * channels + ch];
  }
  std::size_t size() const { return data.size(); }
};

/// N stacked Tensor3 blocks, [n][row][col][channel]. A vector batch is the
/// special case height = width = 1, which makes flattening a no-op.
template <typename T>
struct Batch {
  std::size_t count = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<T> data;

  Batch() = default;
  Batch(std::size_t n, std::size_t h, std::size_t w, std::size_t c, T fill = T(0))
      : count(n), height(h), width(w), channels(c), data(n * h * w * c, fill) {}

  static Batch vectors(std::size_t n, std::size_t len, T fill = T(0)) {
    return Batch(n, 1, 1, len, fill);
  }

  static Batch stack(std::span<const Tensor3<T>> items) {
    if (items.empty()) return Batch();
    Batch b(items.size(), items[0].height, items[0].width, items[0].channels);
    for (std::size_t n = 0; n < items.size(); ++n) {
      const auto& t = items[n];
      if (t.height != b.height || t.width != b.width || t.channels != b.channels) {
        throw ShapeError("cannot stack tensors of differing shapes");
      }
      std::copy(t.data.begin(), t.data.end(), b.data.begin() + n * b.sample_size());
    }
    return b;
  }

  std::size_t sample_size() const { return height * width * channels; }
  std::size_t positions() const { return count * height * width; }

  std::span<T> sample(std::size_t n) {
    return {data.data() + n * sample_size(), sample_size()};
  }
  std::span<const T> sample(std::size_t n) const {
    return {data.data() + n * sample_size(), sample_size()};
  }

  Tensor3<T> tensor(std::size_t n) const {
    Tensor3<T> t(height, width, channels);
    auto s = sample(n);
    std::copy(s.begin(), s.end(), t.data.begin());
    return t;
  }

  bool same_shape(const Batch& o) const {
    return count == o.count && height == o.height && width == o.width &&
           channels == o.channels;
  }
};

template <typename U, typename T>
Batch<U> cast_batch(const Batch<T>& b) {
  Batch<U> out(b.count, b.height, b.width, b.channels);
  for (std::size_t i = 0; i < b.data.size(); ++i) out.data[i] = static_cast<U>(b.data[i]);
  return out;
}

template <typename U, typename T>
std::vector<U> cast_vector(const std::vector<T>& v) {
  return std::vector<U>(v.begin(), v.end());
}

inline std::string shape_string(std::size_t n, std::size_t h, std::size_t w, std::size_t c) {
  return std::to_string(n) + "x" + std::to_string(h) + "x" + std::to_string(w) + "x" +
         std::to_string(c);
}

template <typename T>
std::string shape_string(const Batch<T>& b) {
  return shape_string(b.count, b.height, b.width, b.channels);
}

}  // namespace ghs::nn
