#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ghs/error.hpp"
#include "ghs/model/architecture.hpp"
#include "ghs/nn/adam.hpp"
#include "ghs/nn/batch_norm.hpp"
#include "ghs/nn/conv.hpp"
#include "ghs/nn/dense.hpp"
#include "ghs/nn/dropout.hpp"
#include "ghs/nn/init.hpp"
#include "ghs/nn/loss.hpp"
#include "ghs/rng.hpp"

namespace ghs {

/// Parameters of one GHS-S2Net model in build order. Instantiated with
/// float for training and inference and with double for gradient checks.
template <typename T>
struct Network {
  ArchitectureConfig arch;
  nn::ConvLayer<T> conv1, conv2;
  nn::BatchNormParams<T> bn1;
  nn::ConvLayer<T> conv3, conv4;
  nn::BatchNormParams<T> bn2;
  nn::DenseLayer<T> dense1, dense2;

  std::string zone_id;
  std::uint64_t seed = 0;
  std::uint32_t epochs = 0;

  /// Visits every stored blob in file order as (name, span, trainable).
  template <typename F>
  void for_each_blob(F&& f) {
    visit_blobs(*this, f);
  }
  template <typename F>
  void for_each_blob(F&& f) const {
    visit_blobs(*this, f);
  }

  template <typename F>
  void for_each_trainable(F&& f) {
    for_each_blob([&](const char* name, auto blob, bool trainable) {
      if (trainable) f(name, blob);
    });
  }
  template <typename F>
  void for_each_trainable(F&& f) const {
    for_each_blob([&](const char* name, auto blob, bool trainable) {
      if (trainable) f(name, blob);
    });
  }

  std::size_t stored_scalars() const {
    std::size_t n = 0;
    for_each_blob([&](const char*, auto blob, bool) { n += blob.size(); });
    return n;
  }

  /// Flat copy of the trainable parameters (optimizer view).
  std::vector<T> trainable_vector() const {
    std::vector<T> out;
    for_each_trainable([&](const char*, auto blob) { out.insert(out.end(), blob.begin(), blob.end()); });
    return out;
  }

  void set_trainable(std::span<const T> flat) {
    std::size_t pos = 0;
    for_each_trainable([&](const char*, auto blob) {
      if (pos + blob.size() > flat.size()) throw ShapeError("set_trainable: vector too short");
      std::copy(flat.begin() + pos, flat.begin() + pos + blob.size(), blob.begin());
      pos += blob.size();
    });
    if (pos != flat.size()) throw ShapeError("set_trainable: vector too long");
  }

 private:
  template <typename Self, typename F>
  static void visit_blobs(Self& s, F& f) {
    auto conv = [&](const char* w, const char* b, auto& layer) {
      f(w, std::span(layer.kernel), true);
      f(b, std::span(layer.bias), true);
    };
    auto bn = [&](const char* g, const char* b, const char* mm, const char* mv, auto& p) {
      f(g, std::span(p.gamma), true);
      f(b, std::span(p.beta), true);
      f(mm, std::span(p.moving_mean), false);
      f(mv, std::span(p.moving_var), false);
    };
    auto dense = [&](const char* w, const char* b, auto& layer) {
      f(w, std::span(layer.weights), true);
      f(b, std::span(layer.bias), true);
    };
    conv("conv1.kernel", "conv1.bias", s.conv1);
    conv("conv2.kernel", "conv2.bias", s.conv2);
    bn("bn1.gamma", "bn1.beta", "bn1.moving_mean", "bn1.moving_var", s.bn1);
    conv("conv3.kernel", "conv3.bias", s.conv3);
    conv("conv4.kernel", "conv4.bias", s.conv4);
    bn("bn2.gamma", "bn2.beta", "bn2.moving_mean", "bn2.moving_var", s.bn2);
    dense("dense1.weights", "dense1.bias", s.dense1);
    dense("dense2.weights", "dense2.bias", s.dense2);
  }
};

using ModelParameters = Network<float>;

/// Allocates every layer for `arch` with zero weights and identity batch norm.
template <typename T>
Network<T> make_network(const ArchitectureConfig& arch) {
  arch.validate();
  using nn::Activation;
  const auto [fa, fb] = arch.block_filters;
  Network<T> net;
  net.arch = arch;
  net.conv1 = nn::ConvLayer<T>(arch.bands, fa, Activation::linear);
  net.conv2 = nn::ConvLayer<T>(fa, fa, Activation::tanh);
  net.bn1 = nn::BatchNormParams<T>(fa, arch.bn_epsilon, arch.bn_momentum);
  net.conv3 = nn::ConvLayer<T>(fa, fb, Activation::linear);
  net.conv4 = nn::ConvLayer<T>(fb, fb, Activation::tanh);
  net.bn2 = nn::BatchNormParams<T>(fb, arch.bn_epsilon, arch.bn_momentum);
  net.dense1 = nn::DenseLayer<T>(arch.flatten_width(), arch.hidden_units, Activation::tanh);
  net.dense2 = nn::DenseLayer<T>(arch.hidden_units, 1, Activation::sigmoid);
  return net;
}

/// Draws every conv and dense weight and bias from U[-0.1065, 0.1065] in
/// build order; batch norm starts at gamma=1, beta=0, mean 0, variance 1.
template <typename T = float>
Network<T> init_params(const ArchitectureConfig& arch, Rng& rng) {
  Network<T> net = make_network<T>(arch);
  net.for_each_blob([&](const char* name, std::span<T> blob, bool trainable) {
    const std::string n(name);
    if (trainable && n.rfind("bn", 0) != 0) nn::fill_uniform(blob, rng);
  });
  return net;
}

template <typename T = float>
Network<T> build_model(const ArchitectureConfig& arch, std::uint64_t seed) {
  Rng rng(derive_seed(seed, streams::init));
  Network<T> net = init_params<T>(arch, rng);
  net.seed = seed;
  return net;
}

template <typename U, typename T>
Network<U> convert_network(const Network<T>& src) {
  Network<U> dst = make_network<U>(src.arch);
  dst.zone_id = src.zone_id;
  dst.seed = src.seed;
  dst.epochs = src.epochs;
  std::vector<std::span<const T>> blobs;
  src.for_each_blob([&](const char*, std::span<const T> b, bool) { blobs.push_back(b); });
  std::size_t i = 0;
  dst.for_each_blob([&](const char*, std::span<U> b, bool) {
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = static_cast<U>(blobs[i][k]);
    ++i;
  });
  return dst;
}

/// Intermediate state of a train-mode pass, consumed by backward().
template <typename T>
struct ForwardCache {
  nn::ConvCache<T> conv1, conv2, conv3, conv4;
  nn::BatchNormCache<T> bn1, bn2;
  std::vector<T> drop1, drop2;
  nn::DenseCache<T> dense1, dense2;
};

template <typename T>
void check_patch_batch(const Network<T>& net, const nn::Batch<T>& patches) {
  const auto& a = net.arch;
  if (patches.height != a.patch_size || patches.width != a.patch_size ||
      patches.channels != a.bands) {
    throw ShapeError("expected patches of " + std::to_string(a.patch_size) + "x" +
                     std::to_string(a.patch_size) + "x" + std::to_string(a.bands) + ", got " +
                     nn::shape_string(patches));
  }
}

/// One probability per patch, in batch order. Train mode needs `rng` for
/// the dropout masks; infer mode uses moving statistics and no dropout.
template <typename T>
std::vector<T> forward_batch(const Network<T>& net, const nn::Batch<T>& patches, nn::Mode mode,
                             Rng* rng = nullptr, ForwardCache<T>* cache = nullptr) {
  check_patch_batch(net, patches);
  if (patches.count == 0) return {};
  if (mode == nn::Mode::train && rng == nullptr) {
    throw ConfigError("forward_batch in train mode requires a random generator");
  }
  Rng unused(0);
  Rng& r = rng ? *rng : unused;
  const double rate = net.arch.dropout_rate;

  auto x = nn::conv2d(patches, net.conv1, cache ? &cache->conv1 : nullptr);
  x = nn::conv2d(x, net.conv2, cache ? &cache->conv2 : nullptr);
  x = nn::batch_norm(x, net.bn1, mode, cache ? &cache->bn1 : nullptr);
  x = nn::dropout(x, rate, r, mode, cache ? &cache->drop1 : nullptr);
  x = nn::conv2d(x, net.conv3, cache ? &cache->conv3 : nullptr);
  x = nn::conv2d(x, net.conv4, cache ? &cache->conv4 : nullptr);
  x = nn::batch_norm(x, net.bn2, mode, cache ? &cache->bn2 : nullptr);
  x = nn::dropout(x, rate, r, mode, cache ? &cache->drop2 : nullptr);
  x = nn::dense(x, net.dense1, cache ? &cache->dense1 : nullptr);
  x = nn::dense(x, net.dense2, cache ? &cache->dense2 : nullptr);
  return std::move(x.data);
}

/// Sets both batch-norm layers' moving statistics to the exact moments of
/// `patches` under the current weights, along the inference path (no
/// dropout). bn1 goes first because bn2 sees its output.
template <typename T>
void recalibrate_batch_norm(Network<T>& net, const nn::Batch<T>& patches, std::size_t chunk = 4096) {
  check_patch_batch(net, patches);
  if (patches.count < 2) throw DegenerateError("batch-norm recalibration needs at least 2 patches");
  auto slice = [&](std::size_t i0, std::size_t n) {
    nn::Batch<T> b(n, patches.height, patches.width, patches.channels);
    std::copy_n(patches.data.begin() + static_cast<std::ptrdiff_t>(i0 * patches.sample_size()),
                n * patches.sample_size(), b.data.begin());
    return b;
  };
  nn::ChannelMoments m1(net.bn1.channels());
  for (std::size_t i0 = 0; i0 < patches.count; i0 += chunk) {
    const auto x = slice(i0, std::min(chunk, patches.count - i0));
    m1.add(nn::conv2d(nn::conv2d(x, net.conv1), net.conv2));
  }
  nn::set_moving_stats(net.bn1, m1);
  nn::ChannelMoments m2(net.bn2.channels());
  for (std::size_t i0 = 0; i0 < patches.count; i0 += chunk) {
    const auto x = slice(i0, std::min(chunk, patches.count - i0));
    auto h = nn::conv2d(nn::conv2d(x, net.conv1), net.conv2);
    h = nn::batch_norm(h, net.bn1, nn::Mode::infer);
    m2.add(nn::conv2d(nn::conv2d(h, net.conv3), net.conv4));
  }
  nn::set_moving_stats(net.bn2, m2);
}

/// Gradients of a scalar loss w.r.t. every trainable parameter, returned as
/// a Network whose moving statistics are unused (zero).
template <typename T>
Network<T> backward(const Network<T>& net, const ForwardCache<T>& cache,
                    std::span<const T> grad_probs) {
  Network<T> g = make_network<T>(net.arch);
  g.for_each_blob([](const char*, std::span<T> b, bool) { std::fill(b.begin(), b.end(), T(0)); });

  auto grad = nn::Batch<T>::vectors(grad_probs.size(), 1);
  std::copy(grad_probs.begin(), grad_probs.end(), grad.data.begin());

  auto run_dense = [](const nn::DenseLayer<T>& layer, const nn::DenseCache<T>& c,
                      const nn::Batch<T>& go, nn::DenseLayer<T>& out) {
    nn::DenseGrads<T> dg(layer);
    auto gi = nn::dense_backward(layer, c, go, dg);
    out.weights = std::move(dg.weights);
    out.bias = std::move(dg.bias);
    return gi;
  };
  auto run_conv = [](const nn::ConvLayer<T>& layer, const nn::ConvCache<T>& c,
                     const nn::Batch<T>& go, nn::ConvLayer<T>& out, bool want_input) {
    nn::ConvGrads<T> cg(layer);
    auto gi = nn::conv2d_backward(layer, c, go, cg, want_input);
    out.kernel = std::move(cg.kernel);
    out.bias = std::move(cg.bias);
    return gi;
  };
  auto run_bn = [](const nn::BatchNormParams<T>& p, const nn::BatchNormCache<T>& c,
                   const nn::Batch<T>& go, nn::BatchNormParams<T>& out) {
    nn::BatchNormGrads<T> bg(p);
    auto gi = nn::batch_norm_backward(p, c, go, bg);
    out.gamma = std::move(bg.gamma);
    out.beta = std::move(bg.beta);
    return gi;
  };

  grad = run_dense(net.dense2, cache.dense2, grad, g.dense2);
  grad = run_dense(net.dense1, cache.dense1, grad, g.dense1);  // back to [n][1][1][f_B]
  grad = nn::dropout_backward(grad, cache.drop2);
  grad = run_bn(net.bn2, cache.bn2, grad, g.bn2);
  grad = run_conv(net.conv4, cache.conv4, grad, g.conv4, true);
  grad = run_conv(net.conv3, cache.conv3, grad, g.conv3, true);
  grad = nn::dropout_backward(grad, cache.drop1);
  grad = run_bn(net.bn1, cache.bn1, grad, g.bn1);
  grad = run_conv(net.conv2, cache.conv2, grad, g.conv2, true);
  run_conv(net.conv1, cache.conv1, grad, g.conv1, false);
  return g;
}

/// Binary cross-entropy of the network on a labelled batch. Train mode
/// consumes dropout draws from `rng` but never touches the moving statistics.
template <typename T, typename L>
double evaluate_loss(const Network<T>& net, const nn::Batch<T>& patches, std::span<const L> labels,
                     nn::Mode mode, Rng* rng = nullptr) {
  const auto probs = forward_batch(net, patches, mode, rng);
  return nn::bce_loss(labels, std::span<const T>(probs)).value;
}

/// Loss and gradient of one train-mode pass, without changing `net`.
template <typename T, typename L>
std::pair<double, Network<T>> loss_and_gradient(const Network<T>& net, const nn::Batch<T>& patches,
                                                std::span<const L> labels, Rng& rng,
                                                ForwardCache<T>* keep_cache = nullptr) {
  ForwardCache<T> local;
  ForwardCache<T>& cache = keep_cache ? *keep_cache : local;
  const auto probs = forward_batch(net, patches, nn::Mode::train, &rng, &cache);
  const auto loss = nn::bce_loss(labels, std::span<const T>(probs));
  std::vector<T> grad(loss.gradient.begin(), loss.gradient.end());
  return {loss.value, backward(net, cache, std::span<const T>(grad))};
}

/// Single forward/backward/Adam update. Returns the batch loss measured
/// before the update. Batch-norm moving statistics are blended from this
/// batch after the parameter update.
template <typename T, typename L>
double train_step(Network<T>& net, const nn::Batch<T>& patches, std::span<const L> labels,
                  nn::AdamState& optimizer, Rng& rng) {
  if (patches.count != labels.size()) {
    throw ShapeError("train_step: " + std::to_string(patches.count) + " patches vs " +
                     std::to_string(labels.size()) + " labels");
  }
  ForwardCache<T> cache;
  auto [loss, grads] = loss_and_gradient(net, patches, labels, rng, &cache);
  if (!std::isfinite(loss)) {
    throw NumericError("train_step: non-finite loss over a batch of " +
                       std::to_string(patches.count));
  }
  auto params = net.trainable_vector();
  if (optimizer.m.empty()) optimizer = nn::AdamState(params.size(), optimizer.learning_rate);
  const auto flat_grads = grads.trainable_vector();
  nn::adam_step(std::span<T>(params), std::span<const T>(flat_grads), optimizer);
  net.set_trainable(params);
  nn::update_moving_stats(net.bn1, cache.bn1);
  nn::update_moving_stats(net.bn2, cache.bn2);
  return loss;
}

}  // namespace ghs
