// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sparseloco/config.hpp"
#include "sparseloco/simulator.hpp"

namespace sparseloco {

// ---------------------------------------------------------------------------
// Communication report
// ---------------------------------------------------------------------------

struct CommReportParams {
  std::uint64_t num_params = 512'398'848;
  std::size_t chunk_size = 4096;
  std::uint64_t total_inner_steps = 2445;
  std::size_t inner_steps = 15;  // H for the local-step methods
  std::size_t replicas = 8;
  /// Assumed index cost for the DeMo rows; no stated index width reproduces
  /// the reported DeMo sizes.
  double demo_index_bits = 8.2;
};

enum class SizeUnit : std::uint8_t { decimal_gb, gib, decimal_mb };

struct CommRow {
  std::string method;
  double density = 1.0;
  std::uint64_t message_bytes = 0;
  std::uint64_t syncs = 0;
  unsigned value_bits = 0;
  SizeUnit unit = SizeUnit::decimal_mb;
  bool sparse = false;
  std::string note;
  // Per-worker outbound totals over the whole run.
  std::uint64_t ring_bytes_per_sync = 0;
  std::uint64_t ring_total = 0;
  std::uint64_t ps_upload_total = 0;
  std::uint64_t ps_upload_download_total = 0;

  /// message_bytes in `unit`.
  double size_in_unit() const;
};

std::vector<CommRow> comm_report(const CommReportParams& params = {});
std::string comm_report_csv(const std::vector<CommRow>& rows);
std::string comm_report_text(const std::vector<CommRow>& rows);
std::string_view unit_label(SizeUnit unit) noexcept;

// ---------------------------------------------------------------------------
// Index codec benchmark
// ---------------------------------------------------------------------------

struct CodecBenchRow {
  std::size_t chunk_size = 0;
  std::size_t k = 0;
  double limit = 0.0;        // log2 binom(C, k) / k
  double enumerative = 0.0;  // bits per value actually written
  double naive = 0.0;
  bool round_trip_ok = false;
};

/// One row per k; each row also round-trips `cases_per_row` random subsets
/// of that (C, k) through both codecs.
std::vector<CodecBenchRow> codec_bench(std::size_t chunk_size, const std::vector<std::size_t>& ks,
                                       std::size_t cases_per_row = 200, std::uint64_t seed = 0);

struct FuzzResult {
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;
};

/// Random (C, k, subset) round trips through both index codecs, checking the
/// decoded set and the payload width. C is uniform on [1, max_chunk] and k
/// uniform on [1, min(C, max_k)].
FuzzResult codec_fuzz(std::size_t cases, std::uint64_t seed, std::size_t max_chunk = 4096, std::size_t max_k = 256);

std::string codec_bench_text(const std::vector<CodecBenchRow>& rows);

// ---------------------------------------------------------------------------
// Ablations
// ---------------------------------------------------------------------------

struct AblationOptions {
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::size_t threads = 1;
  /// When set, each run's CSV is written as <dir>/<suite>/<arm>_s<seed>.csv.
  std::optional<std::filesystem::path> output_dir;
};

struct ArmResult {
  std::string label;
  RunConfig config;  // seed of the first run
  std::vector<double> final_losses;
  double mean_loss = 0.0;
  std::uint64_t bytes_per_worker = 0;
  double seconds = 0.0;
};

struct Verdict {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct AblationReport {
  std::string suite;
  std::vector<ArmResult> arms;
  std::vector<Verdict> verdicts;
  const ArmResult& arm(std::string_view label) const;
  std::string to_text() const;
  std::string to_csv() const;
};

/// randk-vs-topk, quant-bits, nesterov-ef, chunking-dct, diloco-momentum.
std::vector<std::string> ablation_suites();
AblationReport run_ablation(const std::string& suite, const AblationOptions& options = {});

}  // namespace sparseloco
