// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sparseloco/errors.hpp"
#include "sparseloco/inner_opt.hpp"
#include "sparseloco/rng.hpp"

namespace sparseloco {
namespace {

// Scalar reference, written out independently of the vectorized kernel.
struct ScalarAdamW {
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double p, double g, double lr, const AdamWHyper& h) {
    ++t;
    m = h.beta1 * m + (1.0 - h.beta1) * g;
    v = h.beta2 * v + (1.0 - h.beta2) * g * g;
    const double mhat = m / (1.0 - std::pow(h.beta1, t));
    const double vhat = v / (1.0 - std::pow(h.beta2, t));
    return p - lr * h.weight_decay * p - lr * mhat / (std::sqrt(vhat) + h.eps);
  }
};

TEST(AdamW, MatchesScalarReference) {
  const AdamWHyper hyper{};
  const std::size_t n = 37;
  Rng rng(9, 0);
  std::vector<double> params(n), ref(n);
  for (std::size_t i = 0; i < n; ++i) params[i] = ref[i] = rng.normal();
  std::vector<ScalarAdamW> scalar(n);
  AdamWState<double> state(n, hyper);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> g(n);
    for (auto& x : g) x = rng.normal();
    const double lr = 1e-3 * (1.0 + 0.1 * t);
    adamw_step<double>(params, g, state, lr);
    for (std::size_t i = 0; i < n; ++i) ref[i] = scalar[i].step(ref[i], g[i], lr, hyper);
  }
  EXPECT_EQ(state.step, 50u);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(params[i], ref[i], 1e-13 * (1.0 + std::abs(ref[i])));
}

TEST(AdamW, FirstStepIsSignDescentPlusDecay) {
  AdamWHyper hyper{};
  hyper.eps = 0.0;
  std::vector<double> p{1.0, -2.0};
  std::vector<double> g{0.3, -5.0};
  AdamWState<double> state(2, hyper);
  adamw_step<double>(p, g, state, 0.01);
  EXPECT_NEAR(p[0], 1.0 - 0.01 * 0.1 * 1.0 - 0.01, 1e-15);
  EXPECT_NEAR(p[1], -2.0 + 0.01 * 0.1 * 2.0 + 0.01, 1e-15);
}

TEST(AdamW, LengthMismatchThrows) {
  std::vector<float> p(3), g(2);
  AdamWState<float> state(3, AdamWHyper{});
  EXPECT_THROW(adamw_step<float>(p, g, state, 1e-3), DimensionError);
}

TEST(Clip, ScalesToMaxNorm) {
  std::vector<double> g{3.0, 4.0};
  EXPECT_DOUBLE_EQ(clip_grad_norm<double>(g, 1.0), 5.0);
  EXPECT_NEAR(g[0], 0.6, 1e-15);
  EXPECT_NEAR(g[1], 0.8, 1e-15);
  std::vector<double> small{0.1, 0.2};
  clip_grad_norm<double>(small, 1.0);
  EXPECT_EQ(small, (std::vector<double>{0.1, 0.2}));
}

TEST(Schedule, WarmupThenCosine) {
  const LrSchedule s{1e-3, 10, 110, 0.1};
  EXPECT_DOUBLE_EQ(lr_at(s, 0), 0.0);
  EXPECT_DOUBLE_EQ(lr_at(s, 5), 5e-4);
  EXPECT_DOUBLE_EQ(lr_at(s, 10), 1e-3);
  const double mid = 1e-4 + 0.9e-3 * 0.5 * (1.0 + std::cos(std::numbers::pi * 0.5));
  EXPECT_NEAR(lr_at(s, 60), mid, 1e-18);
  EXPECT_NEAR(lr_at(s, 110), 1e-4, 1e-18);
  EXPECT_THROW(lr_at(s, 111), DimensionError);
}

TEST(Schedule, NoDecayWindow) {
  const LrSchedule s{2e-3, 4, 4, 0.1};
  EXPECT_DOUBLE_EQ(lr_at(s, 4), 2e-3);
}

}  // namespace
}  // namespace sparseloco
