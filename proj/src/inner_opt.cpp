// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/inner_opt.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sparseloco/errors.hpp"

namespace sparseloco {

template <std::floating_point T>
double clip_grad_norm(std::span<T> grad, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("inner.clip", "max_norm must be positive");
  const double norm = norm2<T>(grad);
  if (norm > max_norm) scale_inplace<T>(static_cast<T>(max_norm / norm), grad);
  return norm;
}

template <std::floating_point T>
void adamw_step(std::span<T> params, std::span<const T> grad, AdamWState<T>& state, double lr) {
  const std::size_t n = params.size();
  if (grad.size() != n || state.m.size() != n || state.v.size() != n) {
    throw DimensionError("adamw_step: length mismatch");
  }
  if (lr < 0.0) throw ConfigError("inner.lr", "learning rate must be non-negative");
  const auto& h = state.hyper;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(h.beta1);
  const T b2 = static_cast<T>(h.beta2);
  const T one_minus_b1 = static_cast<T>(1.0 - h.beta1);
  const T one_minus_b2 = static_cast<T>(1.0 - h.beta2);
  const T bc1 = static_cast<T>(1.0 - std::pow(h.beta1, t));
  const T bc2_sqrt = static_cast<T>(std::sqrt(1.0 - std::pow(h.beta2, t)));
  const T eps = static_cast<T>(h.eps);
  const T step_size = static_cast<T>(lr);
  const T decay = static_cast<T>(1.0 - lr * h.weight_decay);
  T* m = state.m.data();
  T* v = state.v.data();
  for (std::size_t i = 0; i < n; ++i) {
    const T g = grad[i];
    m[i] = b1 * m[i] + one_minus_b1 * g;
    v[i] = b2 * v[i] + one_minus_b2 * g * g;
    const T mhat = m[i] / bc1;
    const T vhat_sqrt = std::sqrt(v[i]) / bc2_sqrt;
    params[i] = params[i] * decay - step_size * (mhat / (vhat_sqrt + eps));
  }
}

double lr_at(const LrSchedule& s, std::size_t step) {
  if (step > s.total_steps) {
    throw DimensionError("lr_at: step " + std::to_string(step) + " beyond total_steps " +
                         std::to_string(s.total_steps));
  }
  if (step < s.warmup_steps) {
    return s.base_lr * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  }
  const std::size_t decay_steps = s.total_steps - s.warmup_steps;
  if (decay_steps == 0) return s.base_lr;
  const double progress = static_cast<double>(step - s.warmup_steps) / static_cast<double>(decay_steps);
  const double min_lr = s.min_lr();
  return min_lr + (s.base_lr - min_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template double clip_grad_norm<float>(std::span<float>, double);
template double clip_grad_norm<double>(std::span<double>, double);
template void adamw_step<float>(std::span<float>, std::span<const float>, AdamWState<float>&, double);
template void adamw_step<double>(std::span<double>, std::span<const double>, AdamWState<double>&, double);

}  // namespace sparseloco
