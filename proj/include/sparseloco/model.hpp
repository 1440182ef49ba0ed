// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sparseloco/rng.hpp"
#include "sparseloco/tensor.hpp"

namespace sparseloco {

/// Layer widths of a fully connected classifier, input first, classes last.
/// Hidden layers use GELU; the output layer is linear (logits).
///
/// Parameters are flattened layer by layer as [W (out x in, row-major), b (out)].
class MlpShape {
 public:
  explicit MlpShape(std::vector<std::size_t> layer_dims);

  const std::vector<std::size_t>& layer_dims() const noexcept { return dims_; }
  std::size_t num_layers() const noexcept { return dims_.size() - 1; }
  std::size_t input_dim() const noexcept { return dims_.front(); }
  std::size_t num_classes() const noexcept { return dims_.back(); }
  std::size_t num_params() const noexcept { return offsets_.back(); }

  /// Offset of layer l's weight block; its bias follows immediately after
  /// in*out entries.
  std::size_t weight_offset(std::size_t layer) const noexcept { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const noexcept {
    return offsets_[layer] + dims_[layer] * dims_[layer + 1];
  }

  bool operator==(const MlpShape& o) const { return dims_ == o.dims_; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
};

/// Row-major batch view: `inputs` holds size() * input_dim features.
template <std::floating_point T>
struct BatchView {
  std::span<const T> inputs;
  std::span<const std::uint32_t> labels;
  std::size_t size() const noexcept { return labels.size(); }
};

template <std::floating_point T>
struct LossAndGrad {
  double loss = 0.0;
  ParamVector<T> grad;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
template <std::floating_point T>
ParamVector<T> init_params(const MlpShape& shape, Rng& rng);

/// Mean softmax cross-entropy over the batch and its exact gradient.
template <std::floating_point T>
LossAndGrad<T> loss_and_grad(const MlpShape& shape, std::span<const T> params, BatchView<T> batch);

/// Mean cross-entropy only (no backward pass).
template <std::floating_point T>
double loss_only(const MlpShape& shape, std::span<const T> params, BatchView<T> batch);

/// Logits for a batch, row-major (batch x classes).
template <std::floating_point T>
std::vector<T> forward_logits(const MlpShape& shape, std::span<const T> params, BatchView<T> batch);

double gelu(double x) noexcept;
double gelu_grad(double x) noexcept;

}  // namespace sparseloco
