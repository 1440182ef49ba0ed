// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

#include "sparseloco/compression.hpp"
#include "sparseloco/rng.hpp"
#include "sparseloco/tensor.hpp"

namespace sparseloco {

// Outer-step building blocks. Every replica holds its own copy of the
// synchronized parameters ("anchors"); each outer step applies one identical
// update to all of them, so the copies stay bit-identical.

/// prev - current
template <std::floating_point T>
ParamVector<T> pseudo_gradient(const ParamVector<T>& prev, const ParamVector<T>& current);

/// (1/R) * sum_r vectors[r], summed in replica order.
template <std::floating_point T>
ParamVector<T> replica_mean(std::span<const ParamVector<T>> vectors);

/// Nesterov outer step:
///   m <- beta m + mean_delta;  theta <- theta - alpha (mean_delta + beta m)
template <std::floating_point T>
void diloco_outer(ParamVector<T>& theta, const ParamVector<T>& mean_delta, ParamVector<T>& momentum, double beta,
                  double alpha);

/// Local outer momentum: per replica m_r <- beta m_r + delta_r, then
/// theta <- theta - alpha * mean_r(delta_r + beta m_r).
template <std::floating_point T>
void lom_outer(ParamVector<T>& theta, std::span<const ParamVector<T>> deltas, std::span<ParamVector<T>> momenta,
               double beta, double alpha);

/// Zero the top `fraction` of entries (by magnitude, per chunk) of a local
/// momentum: m <- m - TopK(m).
template <std::floating_point T>
void lom_subk(ParamVector<T>& momentum, const ChunkLayout& layout, double fraction);

/// Entries per chunk removed by lom_subk for a given fraction.
std::size_t subk_count(std::size_t chunk_size, double fraction);

template <std::floating_point T>
struct SparseStep {
  std::vector<CompressedUpdate<T>> updates;
  /// (1/R) * sum_r dequantized(update_r), parameter domain.
  ParamVector<T> aggregate;
};

/// Throws std::logic_error unless all anchors are bit-identical.
template <std::floating_point T>
void require_synchronized(std::span<const ParamVector<T>> anchors);

/// Error feedback + compression for every replica:
///   e_r <- beta e_r + delta_r;  u_r = Q(Select(e_r));  e_r <- e_r - deq(u_r)
/// and the sparse average of the transmitted updates. `select_rngs` (one per
/// replica) is only read for Random-k.
template <std::floating_point T>
SparseStep<T> compress_with_feedback(std::span<const ParamVector<T>> deltas, std::span<ParamVector<T>> errors,
                                     double beta, const CompressorSpec& spec, std::span<Rng> select_rngs);

/// Aggregate of already-built updates (e.g. decoded from the wire).
template <std::floating_point T>
ParamVector<T> sparse_average(std::span<const CompressedUpdate<T>> updates, std::size_t dct_block);

/// SparseLoCo outer step: EF + compression, sparse aggregate, then
/// theta_r <- theta_r - alpha * aggregate on every anchor.
template <std::floating_point T>
SparseStep<T> sparseloco_outer_step(std::span<ParamVector<T>> anchors, std::span<const ParamVector<T>> deltas,
                                    std::span<ParamVector<T>> errors, double beta, double alpha,
                                    const CompressorSpec& spec, std::span<Rng> select_rngs);

/// Ablation arm: the sparse aggregate additionally passes through the
/// Nesterov recurrence with a global momentum before being applied.
template <std::floating_point T>
SparseStep<T> sparseloco_nesterov_step(std::span<ParamVector<T>> anchors, std::span<const ParamVector<T>> deltas,
                                       std::span<ParamVector<T>> errors, ParamVector<T>& momentum, double ef_beta,
                                       double nesterov_beta, double alpha, const CompressorSpec& spec,
                                       std::span<Rng> select_rngs);

/// DeMo-style single-step update: EF over raw gradients, compression,
/// aggregate, then sign descent theta <- theta - alpha * sign(aggregate)
/// (sign(0) = 0).
template <std::floating_point T>
SparseStep<T> demo_lite_step(std::span<ParamVector<T>> anchors, std::span<const ParamVector<T>> grads,
                             std::span<ParamVector<T>> errors, double beta, double alpha, const CompressorSpec& spec,
                             std::span<Rng> select_rngs);

/// Apply theta <- theta - alpha * update to every anchor.
template <std::floating_point T>
void apply_to_all(std::span<ParamVector<T>> anchors, const ParamVector<T>& update, double alpha);

/// Cosine similarity of local accumulators against a reference momentum:
/// the mean over replicas of cos(ref, acc_r), and cos(ref, mean_r acc_r).
struct CosineDiagnostic {
  double per_replica_mean = 0.0;
  double of_mean = 0.0;
};

template <std::floating_point T>
CosineDiagnostic cosine_to_reference(const ParamVector<T>& reference, std::span<const ParamVector<T>> accumulators);

}  // namespace sparseloco
