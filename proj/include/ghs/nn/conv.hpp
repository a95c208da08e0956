#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ghs/error.hpp"
#include "ghs/nn/kernels.hpp"
#include "ghs/nn/tensor.hpp"

namespace ghs::nn {

/// Valid 2×2 convolution with stride 1. Kernel layout [out][in][kh][kw].
template <typename T>
struct ConvLayer {
  static constexpr std::size_t kernel_size = 2;

  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::vector<T> kernel;
  std::vector<T> bias;
  Activation activation = Activation::linear;

  ConvLayer() = default;
  ConvLayer(std::size_t in, std::size_t out, Activation act)
      : in_channels(in),
        out_channels(out),
        kernel(out * in * kernel_size * kernel_size, T(0)),
        bias(out, T(0)),
        activation(act) {}

  std::size_t patch_width() const { return kernel_size * kernel_size * in_channels; }

  T& weight(std::size_t o, std::size_t c, std::size_t kh, std::size_t kw) {
    return kernel[((o * in_channels + c) * kernel_size + kh) * kernel_size + kw];
  }
  T weight(std::size_t o, std::size_t c, std::size_t kh, std::size_t kw) const {
    return kernel[((o * in_channels + c) * kernel_size + kh) * kernel_size + kw];
  }
};

template <typename T>
struct ConvCache {
  std::size_t in_height = 0;
  std::size_t in_width = 0;
  std::vector<T> columns;  // im2col rows, column order (kh, kw, channel)
  Batch<T> output;         // post-activation
};

template <typename T>
struct ConvGrads {
  std::vector<T> kernel;
  std::vector<T> bias;

  explicit ConvGrads(const ConvLayer<T>& layer)
      : kernel(layer.kernel.size(), T(0)), bias(layer.bias.size(), T(0)) {}
};

namespace detail {

// Column index k = (kh*2 + kw)*C + c  ->  weight matrix wt[k][o].
template <typename T>
std::vector<T> conv_weight_columns(const ConvLayer<T>& layer) {
  const std::size_t c_in = layer.in_channels, c_out = layer.out_channels;
  std::vector<T> wt(layer.patch_width() * c_out);
  for (std::size_t o = 0; o < c_out; ++o)
    for (std::size_t c = 0; c < c_in; ++c)
      for (std::size_t kh = 0; kh < 2; ++kh)
        for (std::size_t kw = 0; kw < 2; ++kw)
          wt[((kh * 2 + kw) * c_in + c) * c_out + o] = layer.weight(o, c, kh, kw);
  return wt;
}

// Same values, layout w[o][k] for the input-gradient kernel.
template <typename T>
std::vector<T> conv_weight_rows(const ConvLayer<T>& layer) {
  const std::size_t c_in = layer.in_channels, c_out = layer.out_channels;
  const std::size_t k_dim = layer.patch_width();
  std::vector<T> w(c_out * k_dim);
  for (std::size_t o = 0; o < c_out; ++o)
    for (std::size_t c = 0; c < c_in; ++c)
      for (std::size_t kh = 0; kh < 2; ++kh)
        for (std::size_t kw = 0; kw < 2; ++kw)
          w[o * k_dim + (kh * 2 + kw) * c_in + c] = layer.weight(o, c, kh, kw);
  return w;
}

template <typename T>
void im2col(const Batch<T>& in, std::vector<T>& cols) {
  const std::size_t h_out = in.height - 1, w_out = in.width - 1, c = in.channels;
  const std::size_t seg = 2 * c;  // two horizontally adjacent pixels
  cols.resize(in.count * h_out * w_out * 4 * c);
  T* dst = cols.data();
  for (std::size_t n = 0; n < in.count; ++n) {
    const T* base = in.data.data() + n * in.sample_size();
    for (std::size_t i = 0; i < h_out; ++i) {
      for (std::size_t j = 0; j < w_out; ++j) {
        const T* top = base + (i * in.width + j) * c;
        const T* bottom = top + in.width * c;
        std::copy(top, top + seg, dst);
        std::copy(bottom, bottom + seg, dst + seg);
        dst += 2 * seg;
      }
    }
  }
}

}  // namespace detail

template <typename T>
void check_conv_input(const Batch<T>& in, const ConvLayer<T>& layer) {
  if (in.height < 2 || in.width < 2) {
    throw ShapeError("conv2d needs input at least 2x2, got " + shape_string(in));
  }
  if (in.channels != layer.in_channels) {
    throw ShapeError("conv2d channel mismatch: input has " + std::to_string(in.channels) +
                     ", layer expects " + std::to_string(layer.in_channels));
  }
}

/// Output is (H-1)×(W-1)×out_channels per sample. When `cache` is non-null it
/// receives what conv2d_backward needs.
template <typename T>
Batch<T> conv2d(const Batch<T>& in, const ConvLayer<T>& layer, ConvCache<T>* cache = nullptr) {
  check_conv_input(in, layer);
  const std::size_t h_out = in.height - 1, w_out = in.width - 1;
  Batch<T> out(in.count, h_out, w_out, layer.out_channels);

  std::vector<T> local;
  std::vector<T>& cols = cache ? cache->columns : local;
  detail::im2col(in, cols);
  const auto wt = detail::conv_weight_columns(layer);
  kernels::affine_rows(cols.data(), out.positions(), layer.patch_width(), wt.data(),
                       layer.bias.data(), layer.out_channels, out.data.data());
  kernels::activate(std::span<T>(out.data), layer.activation);

  if (cache) {
    cache->in_height = in.height;
    cache->in_width = in.width;
    cache->output = out;
  }
  return out;
}

template <typename T>
Tensor3<T> conv2d(const Tensor3<T>& in, const ConvLayer<T>& layer) {
  Batch<T> b(1, in.height, in.width, in.channels);
  b.data = in.data;
  return conv2d(b, layer).tensor(0);
}

/// Accumulates parameter gradients into `grads`; returns d(loss)/d(input)
/// (empty batch when `want_input_grad` is false).
template <typename T>
Batch<T> conv2d_backward(const ConvLayer<T>& layer, const ConvCache<T>& cache,
                         const Batch<T>& grad_out, ConvGrads<T>& grads,
                         bool want_input_grad = true) {
  const Batch<T>& y = cache.output;
  if (!grad_out.same_shape(y)) {
    throw ShapeError("conv2d_backward: gradient shape " + shape_string(grad_out) +
                     " does not match output " + shape_string(y));
  }
  const std::size_t rows = y.positions();
  const std::size_t k_dim = layer.patch_width(), o_dim = layer.out_channels;

  std::vector<T> delta(grad_out.data.size());
  kernels::activation_backward<T>(y.data, grad_out.data, layer.activation, delta);

  std::vector<T> grad_wt(k_dim * o_dim, T(0));
  kernels::affine_param_grads(cache.columns.data(), delta.data(), rows, k_dim, o_dim,
                              grad_wt.data(), grads.bias.data());
  const std::size_t c_in = layer.in_channels;
  for (std::size_t o = 0; o < o_dim; ++o)
    for (std::size_t c = 0; c < c_in; ++c)
      for (std::size_t kh = 0; kh < 2; ++kh)
        for (std::size_t kw = 0; kw < 2; ++kw)
          grads.kernel[((o * c_in + c) * 2 + kh) * 2 + kw] +=
              grad_wt[((kh * 2 + kw) * c_in + c) * o_dim + o];

  if (!want_input_grad) return Batch<T>();

  const auto w = detail::conv_weight_rows(layer);
  std::vector<T> grad_cols(rows * k_dim);
  kernels::affine_input_grads(delta.data(), rows, w.data(), o_dim, k_dim, grad_cols.data());

  // col2im: scatter-add each column row back onto its 2×2 input window.
  Batch<T> grad_in(y.count, cache.in_height, cache.in_width, c_in);
  const std::size_t seg = 2 * c_in;
  const T* src = grad_cols.data();
  for (std::size_t n = 0; n < y.count; ++n) {
    T* base = grad_in.data.data() + n * grad_in.sample_size();
    for (std::size_t i = 0; i < y.height; ++i) {
      for (std::size_t j = 0; j < y.width; ++j) {
        T* top = base + (i * grad_in.width + j) * c_in;
        T* bottom = top + grad_in.width * c_in;
        for (std::size_t s = 0; s < seg; ++s) top[s] += src[s];
        for (std::size_t s = 0; s < seg; ++s) bottom[s] += src[seg + s];
        src += 2 * seg;
      }
    }
  }
  return grad_in;
}

}  // namespace ghs::nn
