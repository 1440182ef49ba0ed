// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "sparseloco/bitbuffer.hpp"
#include "sparseloco/comm_model.hpp"
#include "sparseloco/errors.hpp"
#include "sparseloco/index_codec.hpp"
#include "sparseloco/rng.hpp"
#include "sparseloco/wire.hpp"

namespace sparseloco {

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// DeMo-style message: per chunk a 16-bit scale plus k_c values at 8 bits and
// an assumed fractional index cost per value.
std::uint64_t demo_message_bytes(std::uint64_t n, std::size_t chunk_size, std::size_t k, double index_bits) {
  const auto layout = chunk_layout(n, chunk_size);
  const auto chunk_bits = [&](std::size_t len) {
    const double kc = static_cast<double>(effective_k(k, len));
    return kc == 0.0 ? 0.0 : 16.0 + kc * (8.0 + index_bits);
  };
  const double bits = chunk_bits(layout.chunk_size) * static_cast<double>(layout.num_chunks - 1) +
                      chunk_bits(layout.tail_len);
  return kWireHeaderBytes + static_cast<std::uint64_t>(std::ceil(bits / 8.0));
}

std::vector<std::uint32_t> random_subset(std::size_t chunk_size, std::size_t k, Rng& rng) {
  std::vector<std::uint32_t> pool(chunk_size);
  std::iota(pool.begin(), pool.end(), 0u);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(chunk_size - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Empty string on success, else a description of the failure.
std::string round_trip(std::size_t chunk_size, const std::vector<std::uint32_t>& indices) {
  const IndexSet set(chunk_size, indices);
  for (auto codec : {IndexCodec::naive, IndexCodec::enumerative}) {
    BitWriter out;
    encode_indices(set, codec, out);
    const std::size_t expected = index_payload_bits(chunk_size, indices.size(), codec);
    if (out.bit_len() != expected) {
      return std::string(to_string(codec)) + " wrote " + std::to_string(out.bit_len()) + " bits, expected " +
             std::to_string(expected) + " (C=" + std::to_string(chunk_size) + ", k=" + std::to_string(indices.size()) +
             ")";
    }
    BitReader in(out.bytes(), out.bit_len());
    if (decode_indices(in, chunk_size, indices.size(), codec) != set) {
      return std::string(to_string(codec)) + " round trip mismatch (C=" + std::to_string(chunk_size) +
             ", k=" + std::to_string(indices.size()) + ")";
    }
  }
  return {};
}

RunConfig with_seed(RunConfig c, std::uint64_t seed) {
  c.seed = seed;
  return c;
}

std::string pct(std::size_t k, std::size_t chunk) {
  return fmt("%.2f", 100.0 * static_cast<double>(k) / static_cast<double>(chunk));
}

struct ArmSpec {
  std::string label;
  RunConfig config;
};

std::vector<ArmSpec> suite_arms(const std::string& suite) {
  std::vector<ArmSpec> arms;
  if (suite == "randk-vs-topk") {
    for (std::size_t k : {4, 8, 16}) {
      for (auto sel : {SelectionKind::topk, SelectionKind::randk}) {
        RunConfig c = toy_preset(Algorithm::sparseloco);
        c.compression.k = k;
        c.compression.selection = sel;
        arms.push_back({std::string(sel == SelectionKind::topk ? "topk_" : "randk_") + pct(k, c.compression.chunk_size),
                        c});
      }
    }
  } else if (suite == "quant-bits") {
    for (unsigned b : {1u, 2u, 3u, 4u, 32u}) {
      RunConfig c = toy_preset(Algorithm::sparseloco);
      c.compression.bits = b;
      arms.push_back({"b" + std::to_string(b), c});
    }
  } else if (suite == "nesterov-ef") {
    arms.push_back({"sparseloco", toy_preset(Algorithm::sparseloco)});
    arms.push_back({"sparseloco+nesterov", toy_preset(Algorithm::sparseloco_nesterov)});
  } else if (suite == "chunking-dct") {
    for (auto algo : {Algorithm::demo_lite, Algorithm::sparseloco}) {
      for (bool chunking : {true, false}) {
        for (bool dct : {false, true}) {
          RunConfig c = toy_preset(algo);
          c.compression.chunking = chunking;
          c.compression.dct = dct;
          arms.push_back({std::string(to_string(algo)) + (chunking ? "_chunked" : "_global") + (dct ? "_dct" : ""), c});
        }
      }
    }
  } else if (suite == "diloco-momentum") {
    arms.push_back({"diloco", toy_preset(Algorithm::diloco)});
    arms.push_back({"diloco-sgd", toy_preset(Algorithm::diloco_sgd)});
  } else {
    throw ConfigError("suite", "unknown ablation suite '" + suite + "'");
  }
  for (auto& a : arms) a.config.name = a.label;
  return arms;
}

Verdict less_than(const AblationReport& r, const std::string& better, const std::string& worse) {
  const double a = r.arm(better).mean_loss;
  const double b = r.arm(worse).mean_loss;
  return {better + " < " + worse, a < b, fmt("%.4f", a) + " vs " + fmt("%.4f", b)};
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view unit_label(SizeUnit unit) noexcept {
  switch (unit) {
    case SizeUnit::decimal_gb: return "GB";
    case SizeUnit::gib: return "GiB";
    case SizeUnit::decimal_mb: return "MB";
  }
  return "";
}

double CommRow::size_in_unit() const {
  const double b = static_cast<double>(message_bytes);
  switch (unit) {
    case SizeUnit::decimal_gb: return b / 1e9;
    case SizeUnit::gib: return b / 1073741824.0;
    case SizeUnit::decimal_mb: return b / 1e6;
  }
  return b;
}

std::vector<CommRow> comm_report(const CommReportParams& p) {
  const std::uint64_t n = p.num_params;
  const std::uint64_t every_step = p.total_inner_steps;
  const std::uint64_t local_syncs = num_syncs(p.total_inner_steps, p.inner_steps);
  const std::size_t R = p.replicas;
  std::vector<CommRow> rows;

  const auto finish_dense = [&](CommRow row) {
    row.ring_bytes_per_sync = outbound_bytes_per_sync(Topology::ring_all_reduce, row.message_bytes, row.message_bytes, R);
    row.ring_total = total_volume(row.ring_bytes_per_sync, row.syncs);
    row.ps_upload_total = total_volume(row.message_bytes, row.syncs);
    row.ps_upload_download_total =
        total_volume(parameter_server_traffic(row.message_bytes, row.message_bytes).total(), row.syncs);
    rows.push_back(std::move(row));
  };
  const auto finish_sparse = [&](CommRow row, std::uint64_t union_bytes) {
    row.ring_bytes_per_sync = outbound_bytes_per_sync(Topology::ring_all_gather, 0, row.message_bytes, R);
    row.ring_total = total_volume(row.ring_bytes_per_sync, row.syncs);
    row.ps_upload_total = total_volume(row.message_bytes, row.syncs);
    row.ps_upload_download_total =
        total_volume(parameter_server_traffic(row.message_bytes, union_bytes).total(), row.syncs);
    rows.push_back(std::move(row));
  };

  finish_dense({.method = "AdamW DDP", .message_bytes = dense_message_bytes(n, 16), .syncs = every_step,
                .value_bits = 16, .unit = SizeUnit::decimal_gb, .sparse = false, .note = ""});
  finish_dense({.method = "DiLoCo (H=" + std::to_string(p.inner_steps) + ")", .message_bytes = dense_message_bytes(n, 8),
                .syncs = local_syncs, .value_bits = 8, .unit = SizeUnit::gib, .sparse = false, .note = ""});

  const double c = static_cast<double>(p.chunk_size);
  for (std::size_t k : {std::size_t{32}, std::size_t{128}}) {
    const std::size_t union_k = expected_union_k(p.chunk_size, k, R);
    finish_sparse({.method = "DeMo", .density = static_cast<double>(k) / c,
                   .message_bytes = demo_message_bytes(n, p.chunk_size, k, p.demo_index_bits), .syncs = every_step,
                   .value_bits = 8, .unit = SizeUnit::decimal_mb, .sparse = true,
                   .note = "assumed " + fmt("%.1f", p.demo_index_bits) + "-bit index cost"},
                  demo_message_bytes(n, p.chunk_size, union_k, p.demo_index_bits));
  }
  for (std::size_t k : {std::size_t{32}, std::size_t{128}}) {
    const std::size_t union_k = expected_union_k(p.chunk_size, k, R);
    finish_sparse({.method = "SparseLoCo (H=" + std::to_string(p.inner_steps) + ")",
                   .density = static_cast<double>(k) / c,
                   .message_bytes = message_size_bytes(n, p.chunk_size, k, 2, IndexCodec::enumerative),
                   .syncs = local_syncs, .value_bits = 2, .unit = SizeUnit::decimal_mb, .sparse = true,
                   .note = "enumerative indices"},
                  message_size_bytes(n, p.chunk_size, union_k, 2, IndexCodec::enumerative));
  }
  return rows;
}

std::string comm_report_csv(const std::vector<CommRow>& rows) {
  std::string out =
      "method,density_pct,pseudo_grad_bytes,pseudo_grad_size,unit,syncs,quantization,ring_topology,"
      "ring_bytes_per_sync,ring_total_bytes,ps_upload_total_bytes,ps_upload_download_total_bytes,note\n";
  for (const auto& r : rows) {
    out += r.method + ',' + fmt("%.4g", r.density * 100.0) + ',' + std::to_string(r.message_bytes) + ',' +
           fmt("%.4g", r.size_in_unit()) + ',' + std::string(unit_label(r.unit)) + ',' + std::to_string(r.syncs) + ',' +
           std::to_string(r.value_bits) + "-bit," + (r.sparse ? "ring-all-gather" : "ring-all-reduce") + ',' +
           std::to_string(r.ring_bytes_per_sync) + ',' + std::to_string(r.ring_total) + ',' +
           std::to_string(r.ps_upload_total) + ',' + std::to_string(r.ps_upload_download_total) + ',' + r.note + '\n';
  }
  return out;
}

std::string comm_report_text(const std::vector<CommRow>& rows) {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof line, "%-20s %8s %14s %8s %6s %14s %14s %14s  %s\n", "Method", "Density",
                "Pseudo-Grad", "# Syncs", "Quant", "Ring total", "PS up", "PS up+down", "Note");
  out += line;
  for (const auto& r : rows) {
    const std::string size = fmt(r.size_in_unit() >= 10 ? "%.1f" : "%.3g", r.size_in_unit()) + " " +
                             std::string(unit_label(r.unit));
    std::snprintf(line, sizeof line, "%-20s %7s%% %14s %8llu %6s %12.4g B %12.4g B %12.4g B  %s\n", r.method.c_str(),
                  fmt("%.3g", r.density * 100.0).c_str(), size.c_str(), static_cast<unsigned long long>(r.syncs),
                  (std::to_string(r.value_bits) + "-bit").c_str(), static_cast<double>(r.ring_total),
                  static_cast<double>(r.ps_upload_total), static_cast<double>(r.ps_upload_download_total),
                  r.note.c_str());
    out += line;
  }
  out += "Ring totals use all-reduce for dense methods and naive all-gather for sparse ones.\n";
  out += "PS up+down assumes a union-sparse download for sparse methods.\n";
  return out;
}

// ---------------------------------------------------------------------------

std::vector<CodecBenchRow> codec_bench(std::size_t chunk_size, const std::vector<std::size_t>& ks,
                                       std::size_t cases_per_row, std::uint64_t seed) {
  std::vector<CodecBenchRow> rows;
  Rng rng(seed, 0xbe7c);
  for (std::size_t k : ks) {
    CodecBenchRow row;
    row.chunk_size = chunk_size;
    row.k = k;
    row.limit = limit_bits_per_value(chunk_size, k);
    row.enumerative = bits_per_value(chunk_size, k, IndexCodec::enumerative);
    row.naive = bits_per_value(chunk_size, k, IndexCodec::naive);
    row.round_trip_ok = true;
    for (std::size_t i = 0; i < cases_per_row && row.round_trip_ok; ++i) {
      row.round_trip_ok = round_trip(chunk_size, random_subset(chunk_size, k, rng)).empty();
    }
    rows.push_back(row);
  }
  return rows;
}

FuzzResult codec_fuzz(std::size_t cases, std::uint64_t seed, std::size_t max_chunk, std::size_t max_k) {
  FuzzResult result;
  Rng rng(seed, 0xf022);
  for (std::size_t i = 0; i < cases; ++i) {
    const std::size_t c = 1 + rng.uniform_index(max_chunk);
    const std::size_t k = 1 + rng.uniform_index(std::min(c, max_k));
    auto failure = round_trip(c, random_subset(c, k, rng));
    ++result.cases;
    if (!failure.empty()) {
      if (result.failures == 0) result.first_failure = std::move(failure);
      ++result.failures;
    }
  }
  return result;
}

std::string codec_bench_text(const std::vector<CodecBenchRow>& rows) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof line, "%6s %6s %10s %12s %8s %10s\n", "C", "k", "limit", "enumerative", "naive",
                "roundtrip");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%6zu %6zu %10.3f %12.3f %8.3f %10s\n", r.chunk_size, r.k, r.limit,
                  r.enumerative, r.naive, r.round_trip_ok ? "pass" : "FAIL");
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------

const ArmResult& AblationReport::arm(std::string_view label) const {
  for (const auto& a : arms) {
    if (a.label == label) return a;
  }
  throw std::out_of_range("no ablation arm '" + std::string(label) + "'");
}

std::string AblationReport::to_text() const {
  std::string out = "suite " + suite + "\n";
  char line[200];
  for (const auto& a : arms) {
    std::string seeds;
    for (double l : a.final_losses) seeds += (seeds.empty() ? "" : " ") + fmt("%.4f", l);
    std::snprintf(line, sizeof line, "  %-32s mean %.4f  [%s]  %llu B/sync  %.1fs\n", a.label.c_str(), a.mean_loss,
                  seeds.c_str(), static_cast<unsigned long long>(a.bytes_per_worker), a.seconds);
    out += line;
  }
  for (const auto& v : verdicts) {
    out += std::string(v.passed ? "  PASS " : "  FAIL ") + v.name + " (" + v.detail + ")\n";
  }
  return out;
}

std::string AblationReport::to_csv() const {
  std::string out = "suite,arm,mean_final_loss,seed_losses,bytes_per_sync\n";
  for (const auto& a : arms) {
    std::string seeds;
    for (double l : a.final_losses) seeds += (seeds.empty() ? "" : ";") + fmt("%.17g", l);
    out += suite + ',' + a.label + ',' + fmt("%.17g", a.mean_loss) + ',' + seeds + ',' +
           std::to_string(a.bytes_per_worker) + '\n';
  }
  return out;
}

std::vector<std::string> ablation_suites() {
  return {"randk-vs-topk", "quant-bits", "nesterov-ef", "chunking-dct", "diloco-momentum"};
}

AblationReport run_ablation(const std::string& suite, const AblationOptions& options) {
  if (options.seeds.empty()) throw ConfigError("seeds", "need at least one seed");
  AblationReport report;
  report.suite = suite;
  for (auto& spec : suite_arms(suite)) {
    ArmResult arm;
    arm.label = spec.label;
    arm.config = with_seed(spec.config, options.seeds.front());
    const auto start = std::chrono::steady_clock::now();
    for (auto seed : options.seeds) {
      RunConfig c = with_seed(spec.config, seed);
      const MetricsLog log = run(c, options.threads);
      arm.final_losses.push_back(log.final_eval_loss());
      arm.bytes_per_worker = log.rows.front().bytes_sent_per_worker;
      if (options.output_dir) {
        const auto dir = *options.output_dir / suite;
        std::filesystem::create_directories(dir);
        std::ofstream(dir / (spec.label + "_s" + std::to_string(seed) + ".csv")) << log.to_csv();
      }
    }
    arm.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    arm.mean_loss = std::accumulate(arm.final_losses.begin(), arm.final_losses.end(), 0.0) /
                    static_cast<double>(arm.final_losses.size());
    report.arms.push_back(std::move(arm));
  }

  auto& v = report.verdicts;
  if (suite == "randk-vs-topk") {
    const std::size_t chunk = toy_preset(Algorithm::sparseloco).compression.chunk_size;
    for (std::size_t k : {4, 8, 16}) v.push_back(less_than(report, "topk_" + pct(k, chunk), "randk_" + pct(k, chunk)));
  } else if (suite == "quant-bits") {
    const double b1 = report.arm("b1").mean_loss, b2 = report.arm("b2").mean_loss, b32 = report.arm("b32").mean_loss;
    v.push_back({"b1 - b2 >= 0.1", b1 - b2 >= 0.1, fmt("%.4f", b1 - b2)});
    v.push_back({"|b2 - b32| <= 0.02", std::abs(b2 - b32) <= 0.02, fmt("%.4f", std::abs(b2 - b32))});
  } else if (suite == "nesterov-ef") {
    v.push_back(less_than(report, "sparseloco", "sparseloco+nesterov"));
  } else if (suite == "diloco-momentum") {
    v.push_back(less_than(report, "diloco", "diloco-sgd"));
  } else if (suite == "chunking-dct") {
    bool finite = true;
    for (const auto& a : report.arms) finite = finite && std::isfinite(a.mean_loss);
    v.push_back({"all arms finite", finite, std::to_string(report.arms.size()) + " arms"});
  }
  return report;
}

}  // namespace sparseloco
