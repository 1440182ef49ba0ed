// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparseloco/config.hpp"
#include "sparseloco/outer.hpp"
#include "sparseloco/tensor.hpp"

namespace sparseloco {

// RNG streams, all keyed by RunConfig::seed. Model init uses kInitStream;
// replica r samples its minibatches from kDataStreamBase + r and draws
// Random-k indices from kSelectStreamBase + r.
inline constexpr std::uint64_t kInitStream = 7;
inline constexpr std::uint64_t kDataStreamBase = 1000;
inline constexpr std::uint64_t kSelectStreamBase = 2000;

struct MetricsRow {
  std::size_t outer_step = 0;         // 1-based
  std::size_t inner_step_global = 0;  // inner steps completed per replica
  double mean_loss = 0.0;             // minibatch loss, mean over replicas and inner steps
  std::vector<double> replica_loss;
  std::uint64_t bytes_sent_per_worker = 0;
  /// Only for the first cosine_steps outer steps.
  std::optional<double> cosine_to_reference;
  std::optional<double> cosine_of_mean_accumulator;
  std::optional<double> eval_loss;
  double wall_ms = 0.0;
};

struct MetricsLog {
  std::vector<MetricsRow> rows;
  std::size_t replicas = 0;

  /// CSV with a header line. Doubles use 17 significant digits; wall_ms is
  /// the last column and is dropped when `include_wall` is false.
  std::string to_csv(bool include_wall = true) const;
  double final_eval_loss() const;
  std::uint64_t total_bytes_per_worker() const;
};

/// Read-only view of one finished outer step, for tests and diagnostics.
template <std::floating_point T>
struct StepTrace {
  std::size_t outer_step = 0;
  /// Synchronized parameters after the update (one copy per replica).
  std::span<const ParamVector<T>> anchors;
  /// Raw per-replica pseudo-gradients (or gradients for demo-lite).
  std::span<const ParamVector<T>> deltas;
  /// Per-replica accumulators after the step (LOM momenta or EF buffers);
  /// empty for the global-momentum methods.
  std::span<const ParamVector<T>> accumulators;
  /// Global momentum for diloco / sparseloco-nesterov, else nullptr.
  const ParamVector<T>* global_momentum = nullptr;
  /// Transmitted updates and their aggregate for the sparse methods.
  const SparseStep<T>* sparse = nullptr;
};

template <std::floating_point T>
using StepObserver = std::function<void(const StepTrace<T>&)>;

/// Run T outer steps per `config`. Replicas run their inner loops on up to
/// `threads` threads; results do not depend on the thread count.
/// Throws NumericError on NaN/Inf, ConfigError on an invalid config.
template <std::floating_point T>
MetricsLog run_outer_loop(const RunConfig& config, std::size_t threads = 1, const StepObserver<T>& observer = {});

/// Dispatch on config.precision.
MetricsLog run(const RunConfig& config, std::size_t threads = 1);

/// Per-worker bytes for one sync under the config's topology.
std::uint64_t bytes_per_sync(const RunConfig& config, std::size_t num_params);

/// Threads from SPARSELOCO_THREADS, else 1.
std::size_t threads_from_env();

}  // namespace sparseloco
