// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/outer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sparseloco {

namespace {

template <typename T>
void require_replicas(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": replica count mismatch");
  if (a == 0) throw DimensionError(std::string(what) + ": no replicas");
}

}  // namespace

template <std::floating_point T>
ParamVector<T> pseudo_gradient(const ParamVector<T>& prev, const ParamVector<T>& current) {
  return subtract(prev, current);
}

template <std::floating_point T>
ParamVector<T> replica_mean(std::span<const ParamVector<T>> vectors) {
  if (vectors.empty()) throw DimensionError("replica_mean: no replicas");
  ParamVector<T> sum(vectors[0].size());
  for (const auto& v : vectors) {
    if (v.size() != sum.size()) throw DimensionError("replica_mean: length mismatch");
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
  }
  const T r = static_cast<T>(vectors.size());
  for (auto& x : sum) x /= r;
  return sum;
}

template <std::floating_point T>
void diloco_outer(ParamVector<T>& theta, const ParamVector<T>& mean_delta, ParamVector<T>& momentum, double beta,
                  double alpha) {
  if (theta.size() != mean_delta.size() || theta.size() != momentum.size()) {
    throw DimensionError("diloco_outer: length mismatch");
  }
  const T b = static_cast<T>(beta);
  const T a = static_cast<T>(alpha);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    momentum[i] = b * momentum[i] + mean_delta[i];
    theta[i] -= a * (mean_delta[i] + b * momentum[i]);
  }
}

template <std::floating_point T>
void lom_outer(ParamVector<T>& theta, std::span<const ParamVector<T>> deltas, std::span<ParamVector<T>> momenta,
               double beta, double alpha) {
  require_replicas<T>(deltas.size(), momenta.size(), "lom_outer");
  const T b = static_cast<T>(beta);
  const T a = static_cast<T>(alpha);
  const std::size_t n = theta.size();
  ParamVector<T> sum(n);
  for (std::size_t r = 0; r < deltas.size(); ++r) {
    auto& m = momenta[r];
    const auto& d = deltas[r];
    if (m.size() != n || d.size() != n) throw DimensionError("lom_outer: length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = b * m[i] + d[i];
      sum[i] += d[i] + b * m[i];
    }
  }
  const T count = static_cast<T>(deltas.size());
  for (std::size_t i = 0; i < n; ++i) theta[i] -= a * (sum[i] / count);
}

std::size_t subk_count(std::size_t chunk_size, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw DimensionError("lom_subk: fraction must lie in [0, 1]");
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(chunk_size)));
}

template <std::floating_point T>
void lom_subk(ParamVector<T>& momentum, const ChunkLayout& layout, double fraction) {
  if (layout.length != momentum.size()) throw DimensionError("lom_subk: layout does not match vector");
  for (std::size_t c = 0; c < layout.num_chunks; ++c) {
    const std::size_t len = layout.chunk_len(c);
    const std::size_t kc = subk_count(len, fraction);
    if (kc == 0) continue;
    std::span<T> chunk = momentum.span().subspan(layout.chunk_begin(c), len);
    const auto sel = chunk_topk<T>(std::span<const T>(chunk), chunk_layout(len, len), kc);
    for (auto idx : sel.indices) chunk[idx] = T{0};
  }
}

template <std::floating_point T>
void require_synchronized(std::span<const ParamVector<T>> anchors) {
  for (std::size_t r = 1; r < anchors.size(); ++r) {
    if (anchors[r] != anchors[0]) {
      throw std::logic_error("replica " + std::to_string(r) + " is desynchronized from replica 0");
    }
  }
}

template <std::floating_point T>
ParamVector<T> sparse_average(std::span<const CompressedUpdate<T>> updates, std::size_t dct_block) {
  if (updates.empty()) throw DimensionError("sparse_average: no replicas");
  ParamVector<T> sum(updates[0].layout.length);
  for (const auto& u : updates) accumulate<T>(u, dct_block, T{1}, sum.span());
  const T r = static_cast<T>(updates.size());
  for (auto& x : sum) x /= r;
  return sum;
}

template <std::floating_point T>
SparseStep<T> compress_with_feedback(std::span<const ParamVector<T>> deltas, std::span<ParamVector<T>> errors,
                                     double beta, const CompressorSpec& spec, std::span<Rng> select_rngs) {
  require_replicas<T>(deltas.size(), errors.size(), "compress_with_feedback");
  if (spec.selection == SelectionKind::randk && select_rngs.size() != deltas.size()) {
    throw DimensionError("compress_with_feedback: need one rng per replica for random-k");
  }
  const T b = static_cast<T>(beta);
  SparseStep<T> step{{}, ParamVector<T>(deltas[0].size())};
  step.updates.reserve(deltas.size());
  for (std::size_t r = 0; r < deltas.size(); ++r) {
    auto& e = errors[r];
    const auto& d = deltas[r];
    if (e.size() != d.size()) throw DimensionError("compress_with_feedback: length mismatch");
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = b * e[i] + d[i];
    Rng* rng = select_rngs.empty() ? nullptr : &select_rngs[r];
    auto update = compress<T>(std::span<const T>(e.span()), spec, rng);
    accumulate<T>(update, spec.chunk_size, T{-1}, e.span());
    step.updates.push_back(std::move(update));
  }
  step.aggregate = sparse_average<T>(step.updates, spec.chunk_size);
  return step;
}

template <std::floating_point T>
void apply_to_all(std::span<ParamVector<T>> anchors, const ParamVector<T>& update, double alpha) {
  const T a = static_cast<T>(alpha);
  for (auto& theta : anchors) {
    if (theta.size() != update.size()) throw DimensionError("apply_to_all: length mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= a * update[i];
  }
}

template <std::floating_point T>
SparseStep<T> sparseloco_outer_step(std::span<ParamVector<T>> anchors, std::span<const ParamVector<T>> deltas,
                                    std::span<ParamVector<T>> errors, double beta, double alpha,
                                    const CompressorSpec& spec, std::span<Rng> select_rngs) {
  require_replicas<T>(anchors.size(), deltas.size(), "sparseloco_outer_step");
  require_synchronized<T>(anchors);
  auto step = compress_with_feedback<T>(deltas, errors, beta, spec, select_rngs);
  apply_to_all<T>(anchors, step.aggregate, alpha);
  return step;
}

template <std::floating_point T>
SparseStep<T> sparseloco_nesterov_step(std::span<ParamVector<T>> anchors, std::span<const ParamVector<T>> deltas,
                                       std::span<ParamVector<T>> errors, ParamVector<T>& momentum, double ef_beta,
                                       double nesterov_beta, double alpha, const CompressorSpec& spec,
                                       std::span<Rng> select_rngs) {
  require_replicas<T>(anchors.size(), deltas.size(), "sparseloco_nesterov_step");
  require_synchronized<T>(anchors);
  auto step = compress_with_feedback<T>(deltas, errors, ef_beta, spec, select_rngs);
  // Same arithmetic as diloco_outer, applied to each replica's copy.
  const T b = static_cast<T>(nesterov_beta);
  if (momentum.size() != step.aggregate.size()) throw DimensionError("sparseloco_nesterov_step: length mismatch");
  ParamVector<T> direction(momentum.size());
  for (std::size_t i = 0; i < momentum.size(); ++i) {
    momentum[i] = b * momentum[i] + step.aggregate[i];
    direction[i] = step.aggregate[i] + b * momentum[i];
  }
  apply_to_all<T>(anchors, direction, alpha);
  return step;
}

template <std::floating_point T>
SparseStep<T> demo_lite_step(std::span<ParamVector<T>> anchors, std::span<const ParamVector<T>> grads,
                             std::span<ParamVector<T>> errors, double beta, double alpha, const CompressorSpec& spec,
                             std::span<Rng> select_rngs) {
  require_replicas<T>(anchors.size(), grads.size(), "demo_lite_step");
  require_synchronized<T>(anchors);
  auto step = compress_with_feedback<T>(grads, errors, beta, spec, select_rngs);
  ParamVector<T> sign(step.aggregate.size());
  for (std::size_t i = 0; i < sign.size(); ++i) {
    const T v = step.aggregate[i];
    sign[i] = v > T{0} ? T{1} : (v < T{0} ? T{-1} : T{0});
  }
  apply_to_all<T>(anchors, sign, alpha);
  return step;
}

template <std::floating_point T>
CosineDiagnostic cosine_to_reference(const ParamVector<T>& reference, std::span<const ParamVector<T>> accumulators) {
  if (accumulators.empty()) throw DimensionError("cosine_to_reference: no replicas");
  CosineDiagnostic out;
  for (const auto& acc : accumulators) out.per_replica_mean += cosine_similarity(reference, acc);
  out.per_replica_mean /= static_cast<double>(accumulators.size());
  out.of_mean = cosine_similarity(reference, replica_mean<T>(accumulators));
  return out;
}

#define SPARSELOCO_INSTANTIATE(T)                                                                                  \
  template ParamVector<T> pseudo_gradient<T>(const ParamVector<T>&, const ParamVector<T>&);                        \
  template ParamVector<T> replica_mean<T>(std::span<const ParamVector<T>>);                                        \
  template void diloco_outer<T>(ParamVector<T>&, const ParamVector<T>&, ParamVector<T>&, double, double);          \
  template void lom_outer<T>(ParamVector<T>&, std::span<const ParamVector<T>>, std::span<ParamVector<T>>, double,  \
                             double);                                                                              \
  template void lom_subk<T>(ParamVector<T>&, const ChunkLayout&, double);                                          \
  template void require_synchronized<T>(std::span<const ParamVector<T>>);                                          \
  template ParamVector<T> sparse_average<T>(std::span<const CompressedUpdate<T>>, std::size_t);                    \
  template SparseStep<T> compress_with_feedback<T>(std::span<const ParamVector<T>>, std::span<ParamVector<T>>,     \
                                                   double, const CompressorSpec&, std::span<Rng>);                 \
  template void apply_to_all<T>(std::span<ParamVector<T>>, const ParamVector<T>&, double);                         \
  template SparseStep<T> sparseloco_outer_step<T>(std::span<ParamVector<T>>, std::span<const ParamVector<T>>,      \
                                                  std::span<ParamVector<T>>, double, double, const CompressorSpec&, \
                                                  std::span<Rng>);                                                 \
  template SparseStep<T> sparseloco_nesterov_step<T>(std::span<ParamVector<T>>, std::span<const ParamVector<T>>,   \
                                                     std::span<ParamVector<T>>, ParamVector<T>&, double, double,   \
                                                     double, const CompressorSpec&, std::span<Rng>);               \
  template SparseStep<T> demo_lite_step<T>(std::span<ParamVector<T>>, std::span<const ParamVector<T>>,             \
                                           std::span<ParamVector<T>>, double, double, const CompressorSpec&,       \
                                           std::span<Rng>);                                                        \
  template CosineDiagnostic cosine_to_reference<T>(const ParamVector<T>&, std::span<const ParamVector<T>>);

SPARSELOCO_INSTANTIATE(float)
SPARSELOCO_INSTANTIATE(double)

#undef SPARSELOCO_INSTANTIATE

}  // namespace sparseloco
