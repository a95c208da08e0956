#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ghs/error.hpp"
#include "ghs/nn/tensor.hpp"

namespace ghs::nn {

/// Per-channel batch normalization. gamma/beta are trainable; the moving
/// statistics are not and only change through update_moving_stats().
template <typename T>
struct BatchNormParams {
  std::vector<T> gamma;
  std::vector<T> beta;
  std::vector<T> moving_mean;
  std::vector<T> moving_var;
  double epsilon = 1e-3;
  double momentum = 0.99;

  BatchNormParams() = default;
  BatchNormParams(std::size_t channels, double eps = 1e-3, double mom = 0.99)
      : gamma(channels, T(1)), beta(channels, T(0)), moving_mean(channels, T(0)),
        moving_var(channels, T(1)), epsilon(eps), momentum(mom) {}

  std::size_t channels() const { return gamma.size(); }
};

template <typename T>
struct BatchNormCache {
  std::vector<T> normalized;   // x-hat, same layout as the input
  std::vector<double> mean;    // batch statistics per channel
  std::vector<double> var;     // biased
  std::vector<double> inv_std;
  std::size_t batch_count = 0;
};

template <typename T>
struct BatchNormGrads {
  std::vector<T> gamma;
  std::vector<T> beta;
  explicit BatchNormGrads(const BatchNormParams<T>& p)
      : gamma(p.channels(), T(0)), beta(p.channels(), T(0)) {}
};

/// Train mode normalizes with batch moments over every (n, row, col)
/// position of a channel; infer mode uses the moving statistics. Moving
/// statistics are left untouched here; see update_moving_stats().
template <typename T>
Batch<T> batch_norm(const Batch<T>& in, const BatchNormParams<T>& p, Mode mode,
                    BatchNormCache<T>* cache = nullptr) {
  const std::size_t ch = p.channels();
  if (in.channels != ch) {
    throw ShapeError("batch_norm channel mismatch: input has " + std::to_string(in.channels) +
                     ", parameters have " + std::to_string(ch));
  }
  Batch<T> out(in.count, in.height, in.width, ch);
  const std::size_t rows = in.positions();

  if (mode == Mode::infer) {
    std::vector<T> scale(ch), shift(ch);
    for (std::size_t c = 0; c < ch; ++c) {
      const double inv = 1.0 / std::sqrt(static_cast<double>(p.moving_var[c]) + p.epsilon);
      scale[c] = static_cast<T>(p.gamma[c] * inv);
      shift[c] = static_cast<T>(p.beta[c] - p.gamma[c] * p.moving_mean[c] * inv);
    }
    for (std::size_t m = 0; m < rows; ++m) {
      const T* x = in.data.data() + m * ch;
      T* y = out.data.data() + m * ch;
      for (std::size_t c = 0; c < ch; ++c) y[c] = x[c] * scale[c] + shift[c];
    }
    return out;
  }

  if (in.count < 2) {
    throw DegenerateError("batch_norm in train mode needs a batch of at least 2, got " +
                          std::to_string(in.count));
  }
  std::vector<double> mean(ch, 0.0), var(ch, 0.0), inv_std(ch);
  for (std::size_t m = 0; m < rows; ++m) {
    const T* x = in.data.data() + m * ch;
    for (std::size_t c = 0; c < ch; ++c) mean[c] += x[c];
  }
  for (auto& v : mean) v /= static_cast<double>(rows);
  for (std::size_t m = 0; m < rows; ++m) {
    const T* x = in.data.data() + m * ch;
    for (std::size_t c = 0; c < ch; ++c) {
      const double d = x[c] - mean[c];
      var[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < ch; ++c) {
    var[c] /= static_cast<double>(rows);
    inv_std[c] = 1.0 / std::sqrt(var[c] + p.epsilon);
  }

  std::vector<T> xhat(in.data.size());
  for (std::size_t m = 0; m < rows; ++m) {
    const T* x = in.data.data() + m * ch;
    T* h = xhat.data() + m * ch;
    T* y = out.data.data() + m * ch;
    for (std::size_t c = 0; c < ch; ++c) {
      h[c] = static_cast<T>((x[c] - mean[c]) * inv_std[c]);
      y[c] = p.gamma[c] * h[c] + p.beta[c];
    }
  }
  if (cache) {
    cache->normalized = std::move(xhat);
    cache->mean = std::move(mean);
    cache->var = std::move(var);
    cache->inv_std = std::move(inv_std);
    cache->batch_count = rows;
  }
  return out;
}

/// Exponential moving update from the statistics of a train-mode pass. The
/// variance is bias-corrected by rows/(rows-1) before blending.
template <typename T>
void update_moving_stats(BatchNormParams<T>& p, const BatchNormCache<T>& cache) {
  const double n = static_cast<double>(cache.batch_count);
  const double correction = n > 1 ? n / (n - 1.0) : 1.0;
  for (std::size_t c = 0; c < p.channels(); ++c) {
    p.moving_mean[c] =
        static_cast<T>(p.momentum * p.moving_mean[c] + (1.0 - p.momentum) * cache.mean[c]);
    p.moving_var[c] = static_cast<T>(p.momentum * p.moving_var[c] +
                                     (1.0 - p.momentum) * cache.var[c] * correction);
  }
}

/// Per-channel sums over every (n, row, col) position, for exact moments of
/// a whole data set rather than a moving estimate.
struct ChannelMoments {
  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::size_t count = 0;

  explicit ChannelMoments(std::size_t channels) : sum(channels, 0.0), sum_sq(channels, 0.0) {}

  template <typename T>
  void add(const Batch<T>& x) {
    if (x.channels != sum.size()) throw ShapeError("ChannelMoments: channel mismatch");
    for (std::size_t m = 0; m < x.positions(); ++m) {
      const T* v = x.data.data() + m * x.channels;
      for (std::size_t c = 0; c < x.channels; ++c) {
        sum[c] += v[c];
        sum_sq[c] += static_cast<double>(v[c]) * v[c];
      }
    }
    count += x.positions();
  }
};

/// Overwrites the moving statistics with the accumulated moments (variance
/// unbiased, as in update_moving_stats).
template <typename T>
void set_moving_stats(BatchNormParams<T>& p, const ChannelMoments& m) {
  if (m.sum.size() != p.channels()) throw ShapeError("set_moving_stats: channel mismatch");
  if (m.count < 2) throw DegenerateError("set_moving_stats needs at least 2 positions");
  const double n = static_cast<double>(m.count);
  for (std::size_t c = 0; c < p.channels(); ++c) {
    const double mean = m.sum[c] / n;
    const double var = std::max(0.0, m.sum_sq[c] / n - mean * mean) * n / (n - 1.0);
    p.moving_mean[c] = static_cast<T>(mean);
    p.moving_var[c] = static_cast<T>(var);
  }
}

template <typename T>
Batch<T> batch_norm_backward(const BatchNormParams<T>& p, const BatchNormCache<T>& cache,
                             const Batch<T>& grad_out, BatchNormGrads<T>& grads) {
  const std::size_t ch = p.channels();
  const std::size_t rows = cache.batch_count;
  if (grad_out.positions() != rows || grad_out.channels != ch) {
    throw ShapeError("batch_norm_backward: gradient shape " + shape_string(grad_out) +
                     " does not match cached batch");
  }
  std::vector<double> sum_dy(ch, 0.0), sum_dy_xhat(ch, 0.0);
  for (std::size_t m = 0; m < rows; ++m) {
    const T* dy = grad_out.data.data() + m * ch;
    const T* h = cache.normalized.data() + m * ch;
    for (std::size_t c = 0; c < ch; ++c) {
      sum_dy[c] += dy[c];
      sum_dy_xhat[c] += static_cast<double>(dy[c]) * h[c];
    }
  }
  for (std::size_t c = 0; c < ch; ++c) {
    grads.gamma[c] += static_cast<T>(sum_dy_xhat[c]);
    grads.beta[c] += static_cast<T>(sum_dy[c]);
  }

  // dx = gamma * inv_std / M * (M*dy - sum(dy) - xhat * sum(dy*xhat))
  Batch<T> grad_in(grad_out.count, grad_out.height, grad_out.width, ch);
  const double inv_rows = 1.0 / static_cast<double>(rows);
  std::vector<double> k(ch), mean_dy(ch), mean_dy_xhat(ch);
  for (std::size_t c = 0; c < ch; ++c) {
    k[c] = p.gamma[c] * cache.inv_std[c];
    mean_dy[c] = sum_dy[c] * inv_rows;
    mean_dy_xhat[c] = sum_dy_xhat[c] * inv_rows;
  }
  for (std::size_t m = 0; m < rows; ++m) {
    const T* dy = grad_out.data.data() + m * ch;
    const T* h = cache.normalized.data() + m * ch;
    T* dx = grad_in.data.data() + m * ch;
    for (std::size_t c = 0; c < ch; ++c) {
      dx[c] = static_cast<T>(k[c] * (dy[c] - mean_dy[c] - h[c] * mean_dy_xhat[c]));
    }
  }
  return grad_in;
}

}  // namespace ghs::nn
