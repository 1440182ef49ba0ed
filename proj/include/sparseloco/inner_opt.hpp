// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>

#include "sparseloco/tensor.hpp"

namespace sparseloco {

struct AdamWHyper {
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 0.1;

  bool operator==(const AdamWHyper&) const = default;
};

template <std::floating_point T>
struct AdamWState {
  AdamWState(std::size_t len, AdamWHyper hyper) : m(len), v(len), hyper(hyper) {}

  ParamVector<T> m;
  ParamVector<T> v;
  std::uint64_t step = 0;
  AdamWHyper hyper;
};

/// Scales `grad` in place so its L2 norm is at most `max_norm`. Returns the
/// norm before clipping.
template <std::floating_point T>
double clip_grad_norm(std::span<T> grad, double max_norm);

/// One decoupled-weight-decay Adam step with bias correction:
///   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
///   p <- p (1 - lr wd) - lr * mhat / (sqrt(vhat) + eps)
template <std::floating_point T>
void adamw_step(std::span<T> params, std::span<const T> grad, AdamWState<T>& state, double lr);

/// Linear warmup to base_lr, then cosine decay to min_lr_ratio * base_lr at
/// total_steps.
struct LrSchedule {
  double base_lr = 1e-3;
  std::size_t warmup_steps = 0;
  std::size_t total_steps = 1;
  double min_lr_ratio = 0.1;

  double min_lr() const noexcept { return base_lr * min_lr_ratio; }
  bool operator==(const LrSchedule&) const = default;
};

double lr_at(const LrSchedule& schedule, std::size_t step);

}  // namespace sparseloco
