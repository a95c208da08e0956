#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ghs/error.hpp"
#include "ghs/nn/kernels.hpp"
#include "ghs/nn/tensor.hpp"

namespace ghs::nn {

/// Fully connected layer, weights [out][in].
template <typename T>
struct DenseLayer {
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  std::vector<T> weights;
  std::vector<T> bias;
  Activation activation = Activation::tanh;

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Activation act)
      : in_features(in), out_features(out), weights(in * out, T(0)), bias(out, T(0)),
        activation(act) {}

  T& weight(std::size_t o, std::size_t i) { return weights[o * in_features + i]; }
  T weight(std::size_t o, std::size_t i) const { return weights[o * in_features + i]; }
};

template <typename T>
struct DenseCache {
  Batch<T> input;
  Batch<T> output;
};

template <typename T>
struct DenseGrads {
  std::vector<T> weights;
  std::vector<T> bias;

  explicit DenseGrads(const DenseLayer<T>& layer)
      : weights(layer.weights.size(), T(0)), bias(layer.bias.size(), T(0)) {}
};

/// Treats each sample as a flat vector of sample_size() values, so a
/// [n][1][1][c] block and a [n][h][w][c] block flatten the same way.
template <typename T>
Batch<T> dense(const Batch<T>& in, const DenseLayer<T>& layer, DenseCache<T>* cache = nullptr) {
  if (in.sample_size() != layer.in_features) {
    throw ShapeError("dense input length " + std::to_string(in.sample_size()) +
                     " does not match layer input " + std::to_string(layer.in_features));
  }
  std::vector<T> wt(layer.in_features * layer.out_features);
  for (std::size_t o = 0; o < layer.out_features; ++o)
    for (std::size_t i = 0; i < layer.in_features; ++i)
      wt[i * layer.out_features + o] = layer.weight(o, i);

  auto out = Batch<T>::vectors(in.count, layer.out_features);
  kernels::affine_rows(in.data.data(), in.count, layer.in_features, wt.data(),
                       layer.bias.data(), layer.out_features, out.data.data());
  kernels::activate(std::span<T>(out.data), layer.activation);
  if (cache) {
    cache->input = in;
    cache->output = out;
  }
  return out;
}

template <typename T>
std::vector<T> dense(std::span<const T> x, const DenseLayer<T>& layer) {
  auto in = Batch<T>::vectors(1, x.size());
  std::copy(x.begin(), x.end(), in.data.begin());
  return dense(in, layer).data;
}

/// Returns d(loss)/d(input) shaped like the cached input.
template <typename T>
Batch<T> dense_backward(const DenseLayer<T>& layer, const DenseCache<T>& cache,
                        const Batch<T>& grad_out, DenseGrads<T>& grads) {
  if (!grad_out.same_shape(cache.output)) {
    throw ShapeError("dense_backward: gradient shape " + shape_string(grad_out) +
                     " does not match output " + shape_string(cache.output));
  }
  const std::size_t n = cache.input.count;
  std::vector<T> delta(grad_out.data.size());
  kernels::activation_backward<T>(cache.output.data, grad_out.data, layer.activation, delta);

  std::vector<T> grad_wt(layer.in_features * layer.out_features, T(0));
  kernels::affine_param_grads(cache.input.data.data(), delta.data(), n, layer.in_features,
                              layer.out_features, grad_wt.data(), grads.bias.data());
  for (std::size_t o = 0; o < layer.out_features; ++o)
    for (std::size_t i = 0; i < layer.in_features; ++i)
      grads.weights[o * layer.in_features + i] += grad_wt[i * layer.out_features + o];

  Batch<T> grad_in(cache.input.count, cache.input.height, cache.input.width,
                   cache.input.channels);
  kernels::affine_input_grads(delta.data(), n, layer.weights.data(), layer.out_features,
                              layer.in_features, grad_in.data.data());
  return grad_in;
}

}  // namespace ghs::nn
