// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "sparseloco/config.hpp"
#include "sparseloco/errors.hpp"
#include "sparseloco/model.hpp"
#include "sparseloco/simulator.hpp"
#include "sparseloco/wire.hpp"

namespace sparseloco {
namespace {

RunConfig tiny(Algorithm algo) {
  RunConfig c = toy_preset(algo);
  c.hidden = {16};
  c.data.n_samples = 512;
  c.data.input_dim = 8;
  c.data.n_classes = 4;
  c.data.teacher_width = 16;
  c.data.eval_samples = 128;
  c.replicas = 4;
  c.inner_steps = algo == Algorithm::demo_lite ? 1 : 3;
  c.outer_steps = 6;
  c.inner.warmup_steps = 2;
  c.compression.chunk_size = 32;
  c.compression.k = 4;
  c.cosine_steps = 3;
  c.eval_every = 4;
  return c;
}

TEST(Simulator, RowsAndColumns) {
  const auto c = tiny(Algorithm::sparseloco);
  const auto log = run(c, 1);
  ASSERT_EQ(log.rows.size(), 6u);
  EXPECT_EQ(log.rows[5].inner_step_global, 18u);
  EXPECT_TRUE(log.rows[0].cosine_to_reference.has_value());
  EXPECT_FALSE(log.rows[3].cosine_to_reference.has_value());
  EXPECT_TRUE(log.rows[3].eval_loss.has_value());
  EXPECT_FALSE(log.rows[4].eval_loss.has_value());
  EXPECT_TRUE(log.rows[5].eval_loss.has_value());
  EXPECT_EQ(log.rows[0].replica_loss.size(), 4u);
  const auto csv = log.to_csv(false);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "outer_step,inner_step_global,mean_loss,loss_r0,loss_r1,loss_r2,loss_r3,bytes_sent_per_worker,"
            "cosine_to_reference,cosine_of_mean_accumulator,eval_loss");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Simulator, EveryAlgorithmRunsAndLearns) {
  for (auto algo : {Algorithm::diloco, Algorithm::diloco_sgd, Algorithm::diloco_lom, Algorithm::diloco_lom_subk,
                    Algorithm::sparseloco, Algorithm::sparseloco_nesterov, Algorithm::demo_lite}) {
    auto c = tiny(algo);
    if (algo == Algorithm::demo_lite) c.outer_steps = 18;
    const auto log = run(c, 1);
    EXPECT_TRUE(std::isfinite(log.final_eval_loss())) << to_string(algo);
    EXPECT_LT(log.rows.back().mean_loss, std::log(4.0) + 0.05) << to_string(algo);
  }
}

TEST(Simulator, BytesPerSyncMatchesTopology) {
  auto c = tiny(Algorithm::sparseloco);
  const std::size_t n = MlpShape(c.layer_dims()).num_params();
  const auto msg = message_size_bytes(n, 32, 4, 2, IndexCodec::enumerative);
  EXPECT_EQ(bytes_per_sync(c, n), 3 * msg);
  c.topology = Topology::parameter_server;
  EXPECT_EQ(bytes_per_sync(c, n), msg);
  c.algorithm = Algorithm::diloco;
  c.topology.reset();
  EXPECT_EQ(bytes_per_sync(c, n), 2 * 4 * n * 3 / 4);
  EXPECT_EQ(run(c, 1).rows[0].bytes_sent_per_worker, bytes_per_sync(c, n));
}

TEST(Simulator, ThreadCountDoesNotChangeResults) {
  for (auto algo : {Algorithm::sparseloco, Algorithm::diloco_lom}) {
    auto c = tiny(algo);
    c.compression.selection = SelectionKind::randk;
    EXPECT_EQ(run(c, 1).to_csv(false), run(c, 3).to_csv(false));
  }
}

TEST(Simulator, SeedChangesResults) {
  auto a = tiny(Algorithm::sparseloco);
  auto b = a;
  b.seed = 1;
  EXPECT_NE(run(a, 1).to_csv(false), run(b, 1).to_csv(false));
}

TEST(Simulator, WireVerificationGivesSameTrajectoryAtFullWidth) {
  auto c = tiny(Algorithm::sparseloco);
  c.precision = Precision::f32;
  c.compression.bits = 32;
  auto v = c;
  v.compression.verify_wire = true;
  EXPECT_EQ(run(c, 1).to_csv(false), run(v, 1).to_csv(false));
  c.compression.bits = 2;
  v.compression.bits = 2;
  EXPECT_EQ(run(c, 1).to_csv(false), run(v, 1).to_csv(false));
}

TEST(Simulator, DivergenceRaisesNumericError) {
  auto c = tiny(Algorithm::diloco_sgd);
  c.outer.lr = 1e30;
  c.precision = Precision::f32;
  EXPECT_THROW(run(c, 1), NumericError);
}

TEST(Simulator, ObserverSeesEveryStep) {
  auto c = tiny(Algorithm::sparseloco);
  c.precision = Precision::f64;
  std::size_t calls = 0;
  run_outer_loop<double>(c, 1, [&](const StepTrace<double>& t) {
    ++calls;
    EXPECT_EQ(t.outer_step, calls);
    EXPECT_EQ(t.anchors.size(), 4u);
    EXPECT_EQ(t.accumulators.size(), 4u);
    ASSERT_NE(t.sparse, nullptr);
    EXPECT_EQ(t.sparse->updates.size(), 4u);
    EXPECT_EQ(t.global_momentum, nullptr);
  });
  EXPECT_EQ(calls, 6u);
}

TEST(Simulator, ThreadsFromEnvironment) {
  ::setenv("SPARSELOCO_THREADS", "3", 1);
  EXPECT_EQ(threads_from_env(), 3u);
  ::setenv("SPARSELOCO_THREADS", "zero", 1);
  EXPECT_THROW(threads_from_env(), ConfigError);
  ::unsetenv("SPARSELOCO_THREADS");
  EXPECT_EQ(threads_from_env(), 1u);
}

}  // namespace
}  // namespace sparseloco
