#pragma once

// Row-wise affine kernels shared by conv (after im2col) and dense layers.
//
// Every output row is accumulated in a fixed order (bias first, then input
// columns in index order) independently of the other rows, so a sample's
// result never depends on the batch it travels in.

#include <cmath>
#include <cstddef>
#include <span>

namespace ghs::nn {

enum class Activation { linear, tanh, sigmoid };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

namespace kernels {

/// out[m][o] = bias[o] + sum_k in[m][k] * wt[k][o]   (wt is K×O row-major)
template <typename T>
void affine_rows(const T* in, std::size_t rows, std::size_t k_dim, const T* wt,
                 const T* bias, std::size_t o_dim, T* out) {
  std::size_t m = 0;
  // Four rows at a time to reuse each weight row load; per-row order unchanged.
  for (; m + 4 <= rows; m += 4) {
    T* r0 = out + (m + 0) * o_dim;
    T* r1 = out + (m + 1) * o_dim;
    T* r2 = out + (m + 2) * o_dim;
    T* r3 = out + (m + 3) * o_dim;
    const T* a0 = in + (m + 0) * k_dim;
    const T* a1 = in + (m + 1) * k_dim;
    const T* a2 = in + (m + 2) * k_dim;
    const T* a3 = in + (m + 3) * k_dim;
    for (std::size_t o = 0; o < o_dim; ++o) r0[o] = r1[o] = r2[o] = r3[o] = bias[o];
    for (std::size_t k = 0; k < k_dim; ++k) {
      const T* w = wt + k * o_dim;
      const T x0 = a0[k], x1 = a1[k], x2 = a2[k], x3 = a3[k];
      for (std::size_t o = 0; o < o_dim; ++o) {
        const T wo = w[o];
        r0[o] += x0 * wo;
        r1[o] += x1 * wo;
        r2[o] += x2 * wo;
        r3[o] += x3 * wo;
      }
    }
  }
  for (; m < rows; ++m) {
    T* r = out + m * o_dim;
    const T* a = in + m * k_dim;
    for (std::size_t o = 0; o < o_dim; ++o) r[o] = bias[o];
    for (std::size_t k = 0; k < k_dim; ++k) {
      const T* w = wt + k * o_dim;
      const T x = a[k];
      for (std::size_t o = 0; o < o_dim; ++o) r[o] += x * w[o];
    }
  }
}

/// grad_wt[k][o] += sum_m in[m][k] * delta[m][o];  grad_bias[o] += sum_m delta[m][o]
template <typename T>
void affine_param_grads(const T* in, const T* delta, std::size_t rows,
                        std::size_t k_dim, std::size_t o_dim, T* grad_wt,
                        T* grad_bias) {
  for (std::size_t m = 0; m < rows; ++m) {
    const T* d = delta + m * o_dim;
    const T* a = in + m * k_dim;
    for (std::size_t o = 0; o < o_dim; ++o) grad_bias[o] += d[o];
    for (std::size_t k = 0; k < k_dim; ++k) {
      const T x = a[k];
      T* g = grad_wt + k * o_dim;
      for (std::size_t o = 0; o < o_dim; ++o) g[o] += x * d[o];
    }
  }
}

/// grad_in[m][k] = sum_o delta[m][o] * w[o][k]   (w is O×K row-major)
template <typename T>
void affine_input_grads(const T* delta, std::size_t rows, const T* w,
                        std::size_t o_dim, std::size_t k_dim, T* grad_in) {
  for (std::size_t m = 0; m < rows; ++m) {
    T* g = grad_in + m * k_dim;
    for (std::size_t k = 0; k < k_dim; ++k) g[k] = T(0);
    const T* d = delta + m * o_dim;
    for (std::size_t o = 0; o < o_dim; ++o) {
      const T s = d[o];
      const T* wr = w + o * k_dim;
      for (std::size_t k = 0; k < k_dim; ++k) g[k] += s * wr[k];
    }
  }
}

template <typename T>
T sigmoid(T z) {
  if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
  const T e = std::exp(z);
  return e / (T(1) + e);
}

template <typename T>
void activate(std::span<T> values, Activation a) {
  switch (a) {
    case Activation::linear: break;
    case Activation::tanh:
      for (auto& v : values) v = std::tanh(v);
      break;
    case Activation::sigmoid:
      for (auto& v : values) v = sigmoid(v);
      break;
  }
}

/// delta = grad_out * f'(z), expressed through the activation output y.
template <typename T>
void activation_backward(std::span<const T> output, std::span<const T> grad_out,
                         Activation a, std::span<T> delta) {
  switch (a) {
    case Activation::linear:
      for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = grad_out[i];
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < delta.size(); ++i) {
        delta[i] = grad_out[i] * (T(1) - output[i] * output[i]);
      }
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < delta.size(); ++i) {
        delta[i] = grad_out[i] * output[i] * (T(1) - output[i]);
      }
      break;
  }
}

}  // namespace kernels
}  // namespace ghs::nn
