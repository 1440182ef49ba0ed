// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparseloco/comm_model.hpp"
#include "sparseloco/compression.hpp"
#include "sparseloco/dataset.hpp"
#include "sparseloco/index_codec.hpp"
#include "sparseloco/inner_opt.hpp"

namespace sparseloco {

enum class Algorithm : std::uint8_t {
  diloco,              // Nesterov outer momentum on the replica mean
  diloco_sgd,          // outer SGD (momentum off)
  diloco_lom,          // per-replica local outer momentum
  diloco_lom_subk,     // LOM with the top fraction of m_r removed each step
  sparseloco,          // error feedback + Top-k + quantization
  sparseloco_nesterov, // sparseloco followed by a global Nesterov step
  demo_lite,           // H = 1, EF on raw gradients, sign descent
};

std::string_view to_string(Algorithm algorithm) noexcept;
Algorithm algorithm_from_string(std::string_view name);
bool is_sparse(Algorithm algorithm) noexcept;

/// Outer beta used when the config leaves `outer.beta` out.
double default_outer_beta(Algorithm algorithm) noexcept;
/// Inner learning rate used when the config leaves `inner.lr` out.
double default_inner_lr(Algorithm algorithm) noexcept;

enum class Precision : std::uint8_t { f32, f64 };
std::string_view to_string(Precision precision) noexcept;

struct DataConfig {
  std::uint64_t seed = 1;
  std::size_t n_samples = 16384;
  std::size_t input_dim = 32;
  std::size_t n_classes = 10;
  std::size_t teacher_depth = 2;
  std::size_t teacher_width = 128;
  std::size_t eval_samples = 2048;
  bool operator==(const DataConfig&) const = default;
};

struct InnerConfig {
  double lr = 1e-3;
  std::size_t warmup_steps = 50;
  double min_lr_ratio = 0.1;
  AdamWHyper adamw{};
  double clip = 1.0;
  std::size_t batch_size = 32;
  bool operator==(const InnerConfig&) const = default;
};

struct OuterConfig {
  /// Required: there is no default outer learning rate.
  std::optional<double> lr;
  double beta = 0.9;
  double nesterov_beta = 0.9;
  double subk_fraction = 0.25;
  bool operator==(const OuterConfig&) const = default;
};

struct CompressionConfig {
  std::size_t chunk_size = 4096;
  std::size_t k = 128;
  unsigned bits = 2;
  IndexCodec codec = IndexCodec::enumerative;
  SelectionKind selection = SelectionKind::topk;
  bool chunking = true;
  bool dct = false;
  /// Round-trip every message through the wire format and aggregate from
  /// the decoded copies.
  bool verify_wire = false;
  CompressorSpec compressor() const;
  double density() const noexcept { return static_cast<double>(k) / static_cast<double>(chunk_size); }
  bool operator==(const CompressionConfig&) const = default;
};

/// Optional sweep: one run ("arm") per listed density and per listed seed.
struct SweepConfig {
  std::vector<double> densities;
  std::vector<std::uint64_t> seeds;
  bool empty() const noexcept { return densities.empty() && seeds.empty(); }
  bool operator==(const SweepConfig&) const = default;
};

struct RunConfig {
  std::string name = "run";
  std::vector<std::size_t> hidden{128, 128};
  DataConfig data{};
  std::size_t replicas = 8;
  std::size_t inner_steps = 15;  // H
  std::size_t outer_steps = 40;  // T
  Algorithm algorithm = Algorithm::sparseloco;
  InnerConfig inner{};
  OuterConfig outer{};
  CompressionConfig compression{};
  /// nullopt selects ring all-reduce for dense methods and ring all-gather
  /// for sparse ones (parameter server when R == 1).
  std::optional<Topology> topology;
  Precision precision = Precision::f32;
  std::uint64_t seed = 0;
  std::size_t cosine_steps = 20;
  std::size_t eval_every = 10;
  std::string output_dir = "runs";
  SweepConfig sweep{};

  std::vector<std::size_t> layer_dims() const;
  SyntheticSpec synthetic_spec() const;
  LrSchedule inner_schedule() const;
  std::size_t total_inner_steps() const noexcept { return inner_steps * outer_steps; }
  Topology effective_topology() const noexcept;
  bool operator==(const RunConfig&) const = default;
};

/// Parse a JSON config. Absent keys take defaults, except `outer.lr`;
/// unknown keys and out-of-range values raise ConfigError naming the field.
/// `compression.density` may be given instead of (or consistently with)
/// `compression.k`; k = round(density * C).
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON (every field explicit). parse_config(to_json(c)) == c.
std::string to_json(const RunConfig& config);

/// Range and cross-field checks; parse_config already calls this.
void validate(const RunConfig& config);

/// Expand the sweep section into concrete runs with distinct names.
std::vector<RunConfig> expand_sweep(const RunConfig& config);

/// Small-scale preset shared by the ablation suites and acceptance tests:
/// a 32-128-128-10 MLP (~22k parameters), C = 256, R = 8, H = 15.
RunConfig toy_preset(Algorithm algorithm);

}  // namespace sparseloco
