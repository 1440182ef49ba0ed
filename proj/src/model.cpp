// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace sparseloco {

MlpShape::MlpShape(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2) throw DimensionError("MlpShape: need at least input and output dims");
  for (auto d : dims_) {
    if (d == 0) throw DimensionError("MlpShape: layer widths must be positive");
  }
  offsets_.reserve(dims_.size());
  offsets_.push_back(0);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(offsets_.back() + dims_[l] * dims_[l + 1] + dims_[l + 1]);
  }
}

double gelu(double x) noexcept {
  return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 * 0.5));
}

double gelu_grad(double x) noexcept {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 * 0.5));
  const double pdf = std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi * std::numbers::sqrt2 * 0.5);
  return cdf + x * pdf;
}

template <std::floating_point T>
ParamVector<T> init_params(const MlpShape& shape, Rng& rng) {
  ParamVector<T> params(shape.num_params());
  const auto& dims = shape.layer_dims();
  for (std::size_t l = 0; l < shape.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    const std::size_t w0 = shape.weight_offset(l);
    for (std::size_t i = 0; i < dims[l] * dims[l + 1]; ++i) {
      params[w0 + i] = static_cast<T>(rng.uniform(-bound, bound));
    }
  }
  return params;
}

namespace {

void check_batch(const MlpShape& shape, std::size_t num_params, std::size_t n_inputs,
                 std::size_t n_labels) {
  if (num_params != shape.num_params()) {
    throw DimensionError("model: expected " + std::to_string(shape.num_params()) +
                         " params, got " + std::to_string(num_params));
  }
  if (n_labels == 0) throw DimensionError("model: empty batch");
  if (n_inputs != n_labels * shape.input_dim()) {
    throw DimensionError("model: batch inputs do not match input_dim * batch_size");
  }
}

// Activations of every layer: acts[0] is the input, acts[L] the logits.
// pre[l] holds pre-activations of hidden layer l (l in [1, L-1]).
template <typename T>
struct ForwardCache {
  std::vector<std::vector<T>> acts;
  std::vector<std::vector<T>> pre;
};

template <typename T>
ForwardCache<T> run_forward(const MlpShape& shape, std::span<const T> params, BatchView<T> batch,
                            bool keep_pre) {
  const auto& dims = shape.layer_dims();
  const std::size_t nl = shape.num_layers();
  const std::size_t bsz = batch.size();
  ForwardCache<T> cache;
  cache.acts.resize(nl + 1);
  cache.pre.resize(nl + 1);
  cache.acts[0].assign(batch.inputs.begin(), batch.inputs.end());
  std::vector<T> wt;
  for (std::size_t l = 0; l < nl; ++l) {
    const std::size_t in = dims[l], out = dims[l + 1];
    const T* w = params.data() + shape.weight_offset(l);
    const T* bias = params.data() + shape.bias_offset(l);
    wt.resize(in * out);
    for (std::size_t o = 0; o < out; ++o) {
      for (std::size_t i = 0; i < in; ++i) wt[i * out + o] = w[o * in + i];
    }
    const std::vector<T>& a = cache.acts[l];
    std::vector<T> z(bsz * out);
    for (std::size_t b = 0; b < bsz; ++b) {
      T* zr = z.data() + b * out;
      std::copy(bias, bias + out, zr);
      const T* ar = a.data() + b * in;
      for (std::size_t i = 0; i < in; ++i) {
        const T ai = ar[i];
        const T* wr = wt.data() + i * out;
        for (std::size_t o = 0; o < out; ++o) zr[o] += ai * wr[o];
      }
    }
    if (l + 1 < nl) {
      std::vector<T> act(z.size());
      for (std::size_t j = 0; j < z.size(); ++j) act[j] = static_cast<T>(gelu(z[j]));
      if (keep_pre) cache.pre[l + 1] = std::move(z);
      cache.acts[l + 1] = std::move(act);
    } else {
      cache.acts[l + 1] = std::move(z);
    }
  }
  return cache;
}

template <typename T>
void check_labels(std::span<const std::uint32_t> labels, std::size_t classes) {
  for (auto y : labels) {
    if (y >= classes) throw DimensionError("model: label out of range");
  }
}

}  // namespace

template <std::floating_point T>
std::vector<T> forward_logits(const MlpShape& shape, std::span<const T> params, BatchView<T> batch) {
  check_batch(shape, params.size(), batch.inputs.size(), batch.labels.size());
  auto cache = run_forward<T>(shape, params, batch, false);
  return std::move(cache.acts.back());
}

template <std::floating_point T>
double loss_only(const MlpShape& shape, std::span<const T> params, BatchView<T> batch) {
  check_batch(shape, params.size(), batch.inputs.size(), batch.labels.size());
  check_labels<T>(batch.labels, shape.num_classes());
  auto cache = run_forward<T>(shape, params, batch, false);
  const std::size_t classes = shape.num_classes();
  const auto& logits = cache.acts.back();
  double total = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const T* row = logits.data() + b * classes;
    const double mx = *std::max_element(row, row + classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(row[c] - mx);
    total += mx + std::log(sum) - row[batch.labels[b]];
  }
  return total / static_cast<double>(batch.size());
}

template <std::floating_point T>
LossAndGrad<T> loss_and_grad(const MlpShape& shape, std::span<const T> params, BatchView<T> batch) {
  check_batch(shape, params.size(), batch.inputs.size(), batch.labels.size());
  check_labels<T>(batch.labels, shape.num_classes());
  const auto& dims = shape.layer_dims();
  const std::size_t nl = shape.num_layers();
  const std::size_t bsz = batch.size();
  const std::size_t classes = shape.num_classes();

  auto cache = run_forward<T>(shape, params, batch, true);

  LossAndGrad<T> result{0.0, ParamVector<T>(shape.num_params())};
  const double inv_b = 1.0 / static_cast<double>(bsz);

  // dL/dlogits = (softmax - onehot) / B
  std::vector<T> delta(bsz * classes);
  const auto& logits = cache.acts.back();
  double total = 0.0;
  for (std::size_t b = 0; b < bsz; ++b) {
    const T* row = logits.data() + b * classes;
    const double mx = *std::max_element(row, row + classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(row[c] - mx);
    const double log_z = mx + std::log(sum);
    total += log_z - row[batch.labels[b]];
    for (std::size_t c = 0; c < classes; ++c) {
      double p = std::exp(row[c] - log_z);
      if (c == batch.labels[b]) p -= 1.0;
      delta[b * classes + c] = static_cast<T>(p * inv_b);
    }
  }
  result.loss = total * inv_b;

  T* grad = result.grad.data();
  for (std::size_t l = nl; l-- > 0;) {
    const std::size_t in = dims[l], out = dims[l + 1];
    const T* w = params.data() + shape.weight_offset(l);
    T* gw = grad + shape.weight_offset(l);
    T* gb = grad + shape.bias_offset(l);
    const std::vector<T>& a = cache.acts[l];
    for (std::size_t b = 0; b < bsz; ++b) {
      const T* ar = a.data() + b * in;
      const T* dr = delta.data() + b * out;
      for (std::size_t o = 0; o < out; ++o) {
        const T d = dr[o];
        gb[o] += d;
        T* gwr = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) gwr[i] += d * ar[i];
      }
    }
    if (l == 0) break;
    std::vector<T> prev(bsz * in, T{0});
    for (std::size_t b = 0; b < bsz; ++b) {
      const T* dr = delta.data() + b * out;
      T* pr = prev.data() + b * in;
      for (std::size_t o = 0; o < out; ++o) {
        const T d = dr[o];
        const T* wr = w + o * in;
        for (std::size_t i = 0; i < in; ++i) pr[i] += d * wr[i];
      }
      const T* zr = cache.pre[l].data() + b * in;
      for (std::size_t i = 0; i < in; ++i) pr[i] *= static_cast<T>(gelu_grad(zr[i]));
    }
    delta = std::move(prev);
  }
  return result;
}

#define SPARSELOCO_INSTANTIATE(T)                                                                \
  template ParamVector<T> init_params<T>(const MlpShape&, Rng&);                                \
  template LossAndGrad<T> loss_and_grad<T>(const MlpShape&, std::span<const T>, BatchView<T>);  \
  template double loss_only<T>(const MlpShape&, std::span<const T>, BatchView<T>);              \
  template std::vector<T> forward_logits<T>(const MlpShape&, std::span<const T>, BatchView<T>);

SPARSELOCO_INSTANTIATE(float)
SPARSELOCO_INSTANTIATE(double)

#undef SPARSELOCO_INSTANTIATE

}  // namespace sparseloco
