// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

#include "sparseloco/dataset.hpp"
#include "sparseloco/errors.hpp"
#include "sparseloco/inner_opt.hpp"
#include "sparseloco/model.hpp"
#include "sparseloco/wire.hpp"

namespace sparseloco {

namespace {

// Runs f(0..n-1) on up to `threads` threads. Exceptions are collected per
// index and the lowest-index one is rethrown, as a serial loop would.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& f) {
  threads = std::clamp<std::size_t>(threads, 1, n);
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += threads) {
          try {
            f(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void append_optional(std::string& out, const std::optional<double>& v) {
  if (v) append_double(out, *v);
}

bool uses_replica_accumulators(Algorithm a) {
  return a == Algorithm::diloco_lom || a == Algorithm::diloco_lom_subk || is_sparse(a);
}

bool uses_global_momentum(Algorithm a) {
  return a == Algorithm::diloco || a == Algorithm::diloco_sgd || a == Algorithm::sparseloco_nesterov;
}

template <std::floating_point T>
void broadcast_first(std::vector<ParamVector<T>>& anchors) {
  // Every replica would run the same deterministic update on identical
  // inputs; copying replica 0's result gives the same bits.
  for (std::size_t r = 1; r < anchors.size(); ++r) anchors[r] = anchors[0];
}

template <std::floating_point T>
ParamVector<T> wire_aggregate(const std::vector<CompressedUpdate<T>>& updates, const CompressionConfig& cc) {
  std::vector<CompressedUpdate<T>> decoded;
  decoded.reserve(updates.size());
  for (const auto& u : updates) {
    const auto bytes = serialize<T>(u, cc.codec);
    const auto expected = message_size_bytes(u.layout.length, u.layout.chunk_size, u.k, u.quant.bits, cc.codec);
    if (bytes.size() != expected) {
      throw std::logic_error("wire: serialized length " + std::to_string(bytes.size()) + " != predicted " +
                             std::to_string(expected));
    }
    decoded.push_back(to_update<T>(deserialize(bytes)));
  }
  return sparse_average<T>(decoded, cc.chunk_size);
}

template <std::floating_point T>
std::optional<CosineDiagnostic> cosine_or_empty(const ParamVector<T>& reference,
                                                std::span<const ParamVector<T>> accumulators) {
  try {
    return cosine_to_reference<T>(reference, accumulators);
  } catch (const UndefinedSimilarity&) {
    return std::nullopt;
  }
}

}  // namespace

std::string MetricsLog::to_csv(bool include_wall) const {
  std::string out = "outer_step,inner_step_global,mean_loss";
  for (std::size_t r = 0; r < replicas; ++r) out += ",loss_r" + std::to_string(r);
  out += ",bytes_sent_per_worker,cosine_to_reference,cosine_of_mean_accumulator,eval_loss";
  if (include_wall) out += ",wall_ms";
  out += '\n';
  for (const auto& row : rows) {
    out += std::to_string(row.outer_step) + ',' + std::to_string(row.inner_step_global) + ',';
    append_double(out, row.mean_loss);
    for (double l : row.replica_loss) {
      out += ',';
      append_double(out, l);
    }
    out += ',' + std::to_string(row.bytes_sent_per_worker) + ',';
    append_optional(out, row.cosine_to_reference);
    out += ',';
    append_optional(out, row.cosine_of_mean_accumulator);
    out += ',';
    append_optional(out, row.eval_loss);
    if (include_wall) {
      char buf[32];
      std::snprintf(buf, sizeof buf, ",%.3f", row.wall_ms);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

double MetricsLog::final_eval_loss() const {
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    if (it->eval_loss) return *it->eval_loss;
  }
  throw std::logic_error("metrics log has no evaluation rows");
}

std::uint64_t MetricsLog::total_bytes_per_worker() const {
  std::uint64_t total = 0;
  for (const auto& row : rows) total += row.bytes_sent_per_worker;
  return total;
}

std::uint64_t bytes_per_sync(const RunConfig& config, std::size_t num_params) {
  const std::uint64_t dense = dense_message_bytes(num_params, 32);
  std::uint64_t message = dense;
  if (is_sparse(config.algorithm)) {
    const auto spec = config.compression.compressor();
    const auto layout = selection_layout(num_params, spec);
    message = message_size_bytes(num_params, layout.chunk_size, selection_k(num_params, spec),
                                 config.compression.bits, config.compression.codec);
  }
  // A sparse method has no dense payload; an all-reduce of it moves messages.
  const std::uint64_t reduce_payload = is_sparse(config.algorithm) ? message : dense;
  return outbound_bytes_per_sync(config.effective_topology(), reduce_payload, message, config.replicas);
}

std::size_t threads_from_env() {
  const char* env = std::getenv("SPARSELOCO_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("SPARSELOCO_THREADS", "expected a positive integer");
  return static_cast<std::size_t>(n);
}

template <std::floating_point T>
MetricsLog run_outer_loop(const RunConfig& config, std::size_t threads, const StepObserver<T>& observer) {
  validate(config);
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  const Algorithm algo = config.algorithm;
  const std::size_t R = config.replicas;
  const std::size_t H = config.inner_steps;
  const std::size_t B = config.inner.batch_size;
  const double alpha = *config.outer.lr;
  const double beta = config.outer.beta;

  const MlpShape shape(config.layer_dims());
  const std::size_t N = shape.num_params();
  const ShardedDataset data = generate_synthetic(config.synthetic_spec());
  const Batch<T> eval_batch = full_batch<T>(generate_heldout(config.synthetic_spec(), config.data.eval_samples));
  const LrSchedule schedule = config.inner_schedule();
  const CompressorSpec spec = config.compression.compressor();
  const ChunkLayout subk_layout = chunk_layout(N, config.compression.chunk_size);
  const std::uint64_t sync_bytes = bytes_per_sync(config, N);

  Rng init_rng(config.seed, kInitStream);
  std::vector<ParamVector<T>> anchors(R, init_params<T>(shape, init_rng));
  std::vector<ParamVector<T>> locals = anchors;
  std::vector<ParamVector<T>> deltas(R, ParamVector<T>(N));
  std::vector<AdamWState<T>> adam(R, AdamWState<T>(N, config.inner.adamw));
  std::vector<Rng> data_rngs;
  std::vector<Rng> select_rngs;
  for (std::size_t r = 0; r < R; ++r) {
    data_rngs.emplace_back(config.seed, kDataStreamBase + r);
    select_rngs.emplace_back(config.seed, kSelectStreamBase + r);
  }
  std::vector<ParamVector<T>> accumulators;
  if (uses_replica_accumulators(algo)) accumulators.assign(R, ParamVector<T>(N));
  ParamVector<T> momentum(N);
  ParamVector<T> reference(N);

  MetricsLog log;
  log.replicas = R;
  for (std::size_t t = 0; t < config.outer_steps; ++t) {
    std::vector<double> loss_sum(R, 0.0);

    parallel_for(R, threads, [&](std::size_t r) {
      if (algo == Algorithm::demo_lite) {
        // One plain gradient at the synchronized point; no inner optimizer.
        const auto batch = sample_batch<T>(data, r, B, data_rngs[r]);
        auto lg = loss_and_grad<T>(shape, anchors[r].span(), batch.view());
        clip_grad_norm<T>(lg.grad.span(), config.inner.clip);
        deltas[r] = std::move(lg.grad);
        loss_sum[r] = lg.loss;
        return;
      }
      locals[r] = anchors[r];
      for (std::size_t h = 0; h < H; ++h) {
        const auto batch = sample_batch<T>(data, r, B, data_rngs[r]);
        auto lg = loss_and_grad<T>(shape, locals[r].span(), batch.view());
        clip_grad_norm<T>(lg.grad.span(), config.inner.clip);
        adamw_step<T>(locals[r].span(), lg.grad.span(), adam[r], lr_at(schedule, t * H + h + 1));
        loss_sum[r] += lg.loss;
      }
      deltas[r] = pseudo_gradient(anchors[r], locals[r]);
    });

    for (std::size_t r = 0; r < R; ++r) {
      if (!deltas[r].all_finite() || !std::isfinite(loss_sum[r])) {
        throw NumericError("non-finite values on replica " + std::to_string(r) + " at outer step " +
                           std::to_string(t + 1));
      }
    }

    const bool diagnose = t < config.cosine_steps;
    if (diagnose) {
      const auto mean = replica_mean<T>(deltas);
      const T b = static_cast<T>(beta);
      for (std::size_t i = 0; i < N; ++i) reference[i] = b * reference[i] + mean[i];
    }

    std::optional<SparseStep<T>> sparse;
    switch (algo) {
      case Algorithm::diloco:
      case Algorithm::diloco_sgd:
        diloco_outer<T>(anchors[0], replica_mean<T>(deltas), momentum, beta, alpha);
        broadcast_first(anchors);
        break;
      case Algorithm::diloco_lom:
      case Algorithm::diloco_lom_subk:
        lom_outer<T>(anchors[0], deltas, accumulators, beta, alpha);
        broadcast_first(anchors);
        if (algo == Algorithm::diloco_lom_subk) {
          for (auto& m : accumulators) lom_subk<T>(m, subk_layout, config.outer.subk_fraction);
        }
        break;
      case Algorithm::sparseloco:
      case Algorithm::sparseloco_nesterov:
      case Algorithm::demo_lite: {
        require_synchronized<T>(anchors);
        sparse = compress_with_feedback<T>(deltas, accumulators, beta, spec, select_rngs);
        if (config.compression.verify_wire) sparse->aggregate = wire_aggregate<T>(sparse->updates, config.compression);
        if (algo == Algorithm::sparseloco) {
          apply_to_all<T>(anchors, sparse->aggregate, alpha);
        } else if (algo == Algorithm::sparseloco_nesterov) {
          diloco_outer<T>(anchors[0], sparse->aggregate, momentum, config.outer.nesterov_beta, alpha);
          broadcast_first(anchors);
        } else {
          // The sign-descent step follows the inner lr schedule.
          const double step_size = alpha * lr_at(schedule, t + 1) / schedule.base_lr;
          ParamVector<T> sign(N);
          for (std::size_t i = 0; i < N; ++i) {
            const T v = sparse->aggregate[i];
            sign[i] = v > T{0} ? T{1} : (v < T{0} ? T{-1} : T{0});
          }
          apply_to_all<T>(anchors, sign, step_size);
        }
        break;
      }
    }
    require_synchronized<T>(anchors);
    if (!anchors[0].all_finite()) {
      throw NumericError("non-finite parameters after outer step " + std::to_string(t + 1));
    }

    MetricsRow row;
    row.outer_step = t + 1;
    row.inner_step_global = (t + 1) * H;
    double total = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      row.replica_loss.push_back(loss_sum[r] / static_cast<double>(H));
      total += loss_sum[r];
    }
    row.mean_loss = total / static_cast<double>(R * H);
    row.bytes_sent_per_worker = sync_bytes;
    if (diagnose) {
      std::optional<CosineDiagnostic> cos;
      if (!accumulators.empty()) {
        cos = cosine_or_empty<T>(reference, accumulators);
      } else {
        cos = cosine_or_empty<T>(reference, std::span<const ParamVector<T>>(&momentum, 1));
      }
      if (cos) {
        row.cosine_to_reference = cos->per_replica_mean;
        row.cosine_of_mean_accumulator = cos->of_mean;
      }
    }
    if ((t + 1) % config.eval_every == 0 || t + 1 == config.outer_steps) {
      row.eval_loss = loss_only<T>(shape, anchors[0].span(), eval_batch.view());
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    log.rows.push_back(std::move(row));

    if (observer) {
      StepTrace<T> trace;
      trace.outer_step = t + 1;
      trace.anchors = anchors;
      trace.deltas = deltas;
      trace.accumulators = accumulators;
      trace.global_momentum = uses_global_momentum(algo) ? &momentum : nullptr;
      trace.sparse = sparse ? &*sparse : nullptr;
      observer(trace);
    }
  }
  return log;
}

MetricsLog run(const RunConfig& config, std::size_t threads) {
  if (config.precision == Precision::f64) return run_outer_loop<double>(config, threads);
  return run_outer_loop<float>(config, threads);
}

template MetricsLog run_outer_loop<float>(const RunConfig&, std::size_t, const StepObserver<float>&);
template MetricsLog run_outer_loop<double>(const RunConfig&, std::size_t, const StepObserver<double>&);

}  // namespace sparseloco
