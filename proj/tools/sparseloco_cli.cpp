// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: train, comm-report, codec-bench, ablate, wire, preset.
// Exit codes: 0 ok, 1 other failure, 2 config error, 3 numeric failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparseloco/comm_model.hpp"
#include "sparseloco/compression.hpp"
#include "sparseloco/config.hpp"
#include "sparseloco/errors.hpp"
#include "sparseloco/harness.hpp"
#include "sparseloco/model.hpp"
#include "sparseloco/rng.hpp"
#include "sparseloco/simulator.hpp"
#include "sparseloco/wire.hpp"

namespace fs = std::filesystem;
using namespace sparseloco;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::string summary_json(const RunConfig& config, const MetricsLog& log) {
  const std::size_t n = MlpShape(config.layer_dims()).num_params();
  nlohmann::json j;
  j["name"] = config.name;
  j["algorithm"] = std::string(to_string(config.algorithm));
  j["num_params"] = n;
  j["outer_steps"] = log.rows.size();
  j["final_mean_loss"] = log.rows.back().mean_loss;
  j["final_eval_loss"] = log.final_eval_loss();
  j["topology"] = std::string(to_string(config.effective_topology()));
  j["bytes_per_sync"] = log.rows.back().bytes_sent_per_worker;
  j["total_bytes_per_worker"] = log.total_bytes_per_worker();
  // Whole-run per-worker volume under every topology that applies.
  nlohmann::json per_topology = nlohmann::json::object();
  for (auto topo : {Topology::ring_all_reduce, Topology::ring_all_gather, Topology::parameter_server}) {
    if (topo != Topology::parameter_server && config.replicas < 2) continue;
    RunConfig c = config;
    c.topology = topo;
    per_topology[std::string(to_string(topo))] = bytes_per_sync(c, n) * log.rows.size();
  }
  j["total_volume_per_topology"] = per_topology;
  return j.dump(2) + "\n";
}

int cmd_train(const std::string& path, const std::string& out_override, std::size_t threads) {
  const RunConfig base = load_config(path);
  const fs::path out_dir = out_override.empty() ? fs::path(base.output_dir) : fs::path(out_override);
  fs::create_directories(out_dir);
  for (const auto& arm : expand_sweep(base)) {
    const MetricsLog log = run(arm, threads);
    std::ofstream(out_dir / (arm.name + ".csv")) << log.to_csv();
    std::ofstream(out_dir / (arm.name + ".summary.json")) << summary_json(arm, log);
    std::printf("%s: final eval loss %.6f, %llu bytes per worker\n", arm.name.c_str(), log.final_eval_loss(),
                static_cast<unsigned long long>(log.total_bytes_per_worker()));
  }
  return 0;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct DumpOptions {
  std::uint64_t length = 10000;
  std::size_t chunk = 4096;
  std::size_t k = 128;
  unsigned bits = 2;
  std::string codec = "enumerative";
  bool dct = false;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_wire_dump(const DumpOptions& o) {
  CompressorSpec spec;
  spec.chunk_size = o.chunk;
  spec.k = o.k;
  spec.quant = QuantSpec{o.bits};
  spec.dct = o.dct;
  validate(spec.quant);
  if (o.k < 1 || o.k > o.chunk) throw ConfigError("k", "must lie in [1, chunk]");
  Rng rng(o.seed, 0);
  std::vector<double> v(o.length);
  for (auto& x : v) x = rng.normal();
  const auto update = compress<double>(v, spec, nullptr);
  const auto bytes = serialize<double>(update, index_codec_from_string(o.codec));
  std::ofstream(o.output, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                  static_cast<std::streamsize>(bytes.size()));
  std::printf("wrote %zu bytes to %s\n", bytes.size(), o.output.c_str());
  return 0;
}

int cmd_wire_parse(const std::string& path, bool show_values) {
  const auto bytes = read_file(path);
  const SparseMessage msg = deserialize(bytes);
  const auto& h = msg.header;
  std::printf("version     %u\nvalue_bits  %u\nindex_codec %s\ndct         %s\nparam_len   %llu\n"
              "chunk_size  %u\nk           %u\nnum_chunks  %u\nbytes       %zu\n",
              h.version, h.value_bits, std::string(to_string(h.codec)).c_str(), h.dct ? "yes" : "no",
              static_cast<unsigned long long>(h.param_len), h.chunk_size, h.k, h.num_chunks, bytes.size());
  const auto dense = msg.dequantized();
  for (std::uint32_t c = 0; c < h.num_chunks; ++c) {
    std::printf("chunk %u: %u entries, scale 0x%04x\n", c, msg.offsets[c + 1] - msg.offsets[c], msg.scales[c]);
    if (!show_values) continue;
    for (std::uint32_t j = msg.offsets[c]; j < msg.offsets[c + 1]; ++j) {
      const std::size_t global = static_cast<std::size_t>(c) * h.chunk_size + msg.indices[j];
      std::printf("  [%zu] %.9g\n", global, dense[global]);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for communication-efficient local-step training"};
  app.require_subcommand(1);

  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: $SPARSELOCO_THREADS or 1)");

  auto* train = app.add_subcommand("train", "Run a config (one CSV log and summary per sweep arm)");
  std::string config_path, out_dir;
  train->add_option("config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out_dir, "Output directory (overrides output_dir)");

  auto* comm = app.add_subcommand("comm-report", "Message sizes, sync counts and per-topology volume");
  CommReportParams comm_params;
  std::string comm_format = "text";
  comm->add_option("--params", comm_params.num_params, "Parameter count N");
  comm->add_option("--chunk", comm_params.chunk_size, "Chunk size C");
  comm->add_option("--steps", comm_params.total_inner_steps, "Total inner steps");
  comm->add_option("--inner-steps", comm_params.inner_steps, "H for local-step methods");
  comm->add_option("--replicas", comm_params.replicas, "Workers R");
  comm->add_option("--demo-index-bits", comm_params.demo_index_bits, "Assumed DeMo index bits per value");
  comm->add_option("--format", comm_format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

  auto* bench = app.add_subcommand("codec-bench", "Index codec bits per value and round trips");
  std::size_t bench_chunk = 4096;
  std::vector<std::size_t> bench_ks{32, 128, 256};
  std::size_t fuzz_cases = 0;
  std::uint64_t bench_seed = 0;
  bench->add_option("--chunk", bench_chunk, "Chunk size C");
  bench->add_option("--k", bench_ks, "Values of k")->delimiter(',');
  bench->add_option("--fuzz", fuzz_cases, "Extra random (C, k, subset) round trips");
  bench->add_option("--seed", bench_seed, "Fuzz seed");

  auto* ablate = app.add_subcommand("ablate", "Run an ablation suite at toy scale");
  std::string suite;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::string ablate_out;
  bool strict = false, ablate_csv = false;
  ablate->add_option("suite", suite, "Suite name")->required()->check(CLI::IsMember(ablation_suites()));
  ablate->add_option("--seeds", seeds, "Seeds")->delimiter(',');
  ablate->add_option("--out", ablate_out, "Directory for per-run CSV logs");
  ablate->add_flag("--csv", ablate_csv, "Print the summary as CSV");
  ablate->add_flag("--strict", strict, "Exit 1 when an ordering verdict fails");

  auto* wire = app.add_subcommand("wire", "Inspect the sparse message format");
  wire->require_subcommand(1);
  auto* dump = wire->add_subcommand("dump", "Compress a random Gaussian vector and write the message");
  DumpOptions dump_opts;
  dump->add_option("output", dump_opts.output, "Output file")->required();
  dump->add_option("--length", dump_opts.length, "Vector length");
  dump->add_option("--chunk", dump_opts.chunk, "Chunk size");
  dump->add_option("--k", dump_opts.k, "Entries per chunk");
  dump->add_option("--bits", dump_opts.bits, "Value bits (1, 2, 3, 4, 32)");
  dump->add_option("--codec", dump_opts.codec, "naive or enumerative");
  dump->add_flag("--dct", dump_opts.dct, "Select in the DCT domain");
  dump->add_option("--seed", dump_opts.seed, "Seed");
  auto* parse = wire->add_subcommand("parse", "Decode a message and print its layout");
  std::string parse_path;
  bool show_values = false;
  parse->add_option("input", parse_path, "Message file")->required()->check(CLI::ExistingFile);
  parse->add_flag("--values", show_values, "Print every dequantized entry");

  auto* preset = app.add_subcommand("preset", "Print the toy-scale config for an algorithm");
  std::string preset_algo = "sparseloco";
  preset->add_option("algorithm", preset_algo, "Algorithm name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (threads == 0) threads = threads_from_env();
    if (*train) return cmd_train(config_path, out_dir, threads);
    if (*comm) {
      const auto rows = comm_report(comm_params);
      std::fputs((comm_format == "csv" ? comm_report_csv(rows) : comm_report_text(rows)).c_str(), stdout);
      return 0;
    }
    if (*bench) {
      const auto rows = codec_bench(bench_chunk, bench_ks, 200, bench_seed);
      std::fputs(codec_bench_text(rows).c_str(), stdout);
      bool ok = true;
      for (const auto& r : rows) ok = ok && r.round_trip_ok;
      if (fuzz_cases > 0) {
        const auto fuzz = codec_fuzz(fuzz_cases, bench_seed, bench_chunk);
        std::printf("fuzz: %zu cases, %zu failures%s%s\n", fuzz.cases, fuzz.failures,
                    fuzz.failures ? ", first: " : "", fuzz.first_failure.c_str());
        ok = ok && fuzz.failures == 0;
      }
      return ok ? 0 : kExitOther;
    }
    if (*ablate) {
      AblationOptions opts;
      opts.seeds = seeds;
      opts.threads = threads;
      if (!ablate_out.empty()) opts.output_dir = ablate_out;
      const auto report = run_ablation(suite, opts);
      std::fputs((ablate_csv ? report.to_csv() : report.to_text()).c_str(), stdout);
      bool ok = true;
      for (const auto& v : report.verdicts) ok = ok && v.passed;
      return strict && !ok ? kExitOther : 0;
    }
    if (*dump) return cmd_wire_dump(dump_opts);
    if (*parse) return cmd_wire_parse(parse_path, show_values);
    if (*preset) {
      std::fputs(to_json(toy_preset(algorithm_from_string(preset_algo))).c_str(), stdout);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOther;
  }
  return 0;
}
