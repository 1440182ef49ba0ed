// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include "sparseloco/config.hpp"
#include "sparseloco/dataset.hpp"
#include "sparseloco/errors.hpp"
#include "sparseloco/inner_opt.hpp"
#include "sparseloco/model.hpp"

namespace sparseloco {
namespace {

SyntheticSpec small_spec(std::size_t n = 256) {
  SyntheticSpec s;
  s.seed = 5;
  s.n_samples = n;
  s.input_dim = 12;
  s.n_classes = 6;
  s.teacher_width = 32;
  s.num_shards = 4;
  return s;
}

// Coordinates to probe: up to `per_layer` evenly spread entries of every
// layer's weight+bias block.
std::vector<std::size_t> probe_coords(const MlpShape& shape, std::size_t per_layer) {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < shape.num_layers(); ++l) {
    const std::size_t begin = shape.weight_offset(l);
    const std::size_t end = shape.bias_offset(l) + shape.layer_dims()[l + 1];
    const std::size_t n = end - begin;
    const std::size_t step = std::max<std::size_t>(1, n / per_layer);
    for (std::size_t i = begin; i < end; i += step) out.push_back(i);
  }
  return out;
}

// Central differences of the double-precision loss at `params` (promoted).
template <typename T>
double fd_derivative(const MlpShape& shape, const std::vector<double>& params, const Batch<double>& batch,
                     std::size_t i, double h) {
  std::vector<double> p = params;
  p[i] = params[i] + h;
  const double up = loss_only<double>(shape, p, batch.view());
  p[i] = params[i] - h;
  const double down = loss_only<double>(shape, p, batch.view());
  return (up - down) / (2.0 * h);
}

template <typename T>
void check_gradient(double rel_tol, double h) {
  const MlpShape shape({12, 32, 20, 6});
  ASSERT_GT(shape.num_params(), 1000u);
  const auto data = generate_synthetic(small_spec());
  std::vector<std::size_t> ids(64);
  std::iota(ids.begin(), ids.end(), 0);
  const auto batch = gather_batch<T>(data, ids);
  const auto batch_d = gather_batch<double>(data, ids);
  Rng rng(11, 0);
  const auto params = init_params<T>(shape, rng);
  const auto lg = loss_and_grad<T>(shape, params.span(), batch.view());
  const std::vector<double> pd(params.begin(), params.end());
  const double gmax = max_abs<T>(lg.grad.span());
  std::size_t checked = 0;
  for (std::size_t i : probe_coords(shape, 110)) {
    const double fd = fd_derivative<T>(shape, pd, batch_d, i, h);
    const double g = lg.grad[i];
    const double denom = std::max({std::abs(fd), std::abs(g), 1e-3 * gmax});
    EXPECT_LE(std::abs(g - fd) / denom, rel_tol) << "coordinate " << i << " grad " << g << " fd " << fd;
    ++checked;
  }
  EXPECT_GE(checked, 300u);
}

TEST(Model, ParamCount) {
  const MlpShape shape({64, 256, 256, 16});
  EXPECT_EQ(shape.num_params(), 64u * 256 + 256 + 256u * 256 + 256 + 256u * 16 + 16);
  EXPECT_EQ(shape.bias_offset(0), 64u * 256);
  EXPECT_EQ(shape.weight_offset(1), 64u * 256 + 256);
}

TEST(Model, ZeroFinalLayerGivesLogClasses) {
  const MlpShape shape({12, 32, 6});
  Rng rng(1, 0);
  auto params = init_params<double>(shape, rng);
  std::fill(params.begin() + static_cast<long>(shape.weight_offset(1)), params.end(), 0.0);
  const auto data = generate_synthetic(small_spec());
  const auto batch = full_batch<double>(data);
  const auto lg = loss_and_grad<double>(shape, params.span(), batch.view());
  EXPECT_NEAR(lg.loss, std::log(6.0), 1e-12);
}

TEST(Model, GradientMatchesFiniteDifferences64) { check_gradient<double>(1e-6, 1e-5); }

TEST(Model, GradientMatchesFiniteDifferences32) { check_gradient<float>(1e-3, 1e-5); }

TEST(Model, DuplicatedBatchIsInvariant) {
  const MlpShape shape({12, 16, 6});
  const auto data = generate_synthetic(small_spec());
  std::vector<std::size_t> ids{0, 3, 7, 11};
  std::vector<std::size_t> twice{0, 3, 7, 11, 0, 3, 7, 11};
  Rng rng(2, 0);
  const auto params = init_params<double>(shape, rng);
  const auto a = loss_and_grad<double>(shape, params.span(), gather_batch<double>(data, ids).view());
  const auto b = loss_and_grad<double>(shape, params.span(), gather_batch<double>(data, twice).view());
  EXPECT_NEAR(a.loss, b.loss, 1e-14);
  EXPECT_LT(max_abs_diff<double>(a.grad.span(), b.grad.span()), 1e-15);
}

TEST(Model, DimensionMismatchThrows) {
  const MlpShape shape({12, 16, 6});
  const auto data = generate_synthetic(small_spec());
  const auto batch = full_batch<double>(data);
  std::vector<double> wrong(shape.num_params() + 1);
  EXPECT_THROW(loss_and_grad<double>(shape, wrong, batch.view()), DimensionError);
  const MlpShape other({11, 16, 6});
  Rng rng(1, 0);
  const auto p = init_params<double>(other, rng);
  EXPECT_THROW(loss_and_grad<double>(other, p.span(), batch.view()), DimensionError);
}

TEST(Model, GeluGradMatchesFiniteDifference) {
  for (double x = -4.0; x <= 4.0; x += 0.37) {
    const double fd = (gelu(x + 1e-6) - gelu(x - 1e-6)) / 2e-6;
    EXPECT_NEAR(gelu_grad(x), fd, 1e-8);
  }
}

TEST(Dataset, Deterministic) {
  EXPECT_EQ(generate_synthetic(small_spec()), generate_synthetic(small_spec()));
  auto other = small_spec();
  other.seed = 6;
  EXPECT_NE(generate_synthetic(small_spec()).inputs(), generate_synthetic(other).inputs());
}

TEST(Dataset, EqualShards) {
  auto spec = small_spec(1000);
  spec.num_shards = 8;
  const auto data = generate_synthetic(spec);
  for (std::size_t r = 0; r < 8; ++r) EXPECT_EQ(data.shard_size(r), 125u);
}

TEST(Dataset, ShardsAreDisjointAndNearEqual) {
  auto spec = small_spec(1003);
  spec.num_shards = 8;
  const auto data = generate_synthetic(spec);
  std::size_t total = 0, lo = data.size(), hi = 0, prev_end = 0;
  for (std::size_t r = 0; r < 8; ++r) {
    const auto [b, e] = data.shard_range(r);
    EXPECT_EQ(b, prev_end);
    prev_end = e;
    total += e - b;
    lo = std::min(lo, e - b);
    hi = std::max(hi, e - b);
    for (std::size_t i = b; i < e; ++i) ASSERT_EQ(data.shard_of(i), r);
  }
  EXPECT_EQ(total, data.size());
  EXPECT_LE(hi - lo, 1u);
}

TEST(Dataset, EveryClassAppears) {
  const RunConfig defaults;
  const auto data = generate_synthetic(defaults.synthetic_spec());
  std::vector<std::size_t> hist(data.num_classes(), 0);
  for (auto y : data.labels()) ++hist[y];
  ASSERT_GE(data.size(), 100 * data.num_classes());
  for (std::size_t c = 0; c < hist.size(); ++c) EXPECT_GT(hist[c], 0u) << "class " << c;
}

TEST(Dataset, SaveLoadRoundTrip) {
  const auto data = generate_synthetic(small_spec(300));
  const auto path = std::filesystem::temp_directory_path() / "sparseloco_dataset_test.bin";
  save_dataset(data, path);
  EXPECT_EQ(load_dataset(path), data);
  std::filesystem::resize_file(path, 40);
  EXPECT_THROW(load_dataset(path), FormatError);
  std::filesystem::remove(path);
}

TEST(Dataset, HeldoutDiffersFromTraining) {
  const auto spec = small_spec(300);
  const auto train = generate_synthetic(spec);
  const auto held = generate_heldout(spec, 100);
  EXPECT_EQ(held.size(), 100u);
  EXPECT_NE(std::vector<float>(train.inputs().begin(), train.inputs().begin() + 12),
            std::vector<float>(held.inputs().begin(), held.inputs().begin() + 12));
}

TEST(Training, AdamWSanityFloor) {
  const RunConfig defaults;
  const auto data = generate_synthetic(defaults.synthetic_spec());
  const MlpShape shape(defaults.layer_dims());
  Rng init(0, 7), sampler(0, 1000);
  auto params = init_params<float>(shape, init);
  AdamWState<float> state(params.size(), AdamWHyper{});
  for (int t = 0; t < 500; ++t) {
    const auto batch = sample_batch<float>(data, 0, 32, sampler);
    auto lg = loss_and_grad<float>(shape, params.span(), batch.view());
    clip_grad_norm<float>(lg.grad.span(), 1.0);
    adamw_step<float>(params.span(), lg.grad.span(), state, 1e-3);
  }
  const auto all = full_batch<float>(data);
  EXPECT_LT(loss_only<float>(shape, params.span(), all.view()), 0.8 * std::log(double(data.num_classes())));
}

}  // namespace
}  // namespace sparseloco
