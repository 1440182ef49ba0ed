// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sparseloco/errors.hpp"

namespace sparseloco {

using nlohmann::json;

std::string_view to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::diloco: return "diloco";
    case Algorithm::diloco_sgd: return "diloco-sgd";
    case Algorithm::diloco_lom: return "diloco-lom";
    case Algorithm::diloco_lom_subk: return "diloco-lom-subk";
    case Algorithm::sparseloco: return "sparseloco";
    case Algorithm::sparseloco_nesterov: return "sparseloco-nesterov";
    case Algorithm::demo_lite: return "demo-lite";
  }
  return "unknown";
}

Algorithm algorithm_from_string(std::string_view name) {
  for (auto a : {Algorithm::diloco, Algorithm::diloco_sgd, Algorithm::diloco_lom, Algorithm::diloco_lom_subk,
                 Algorithm::sparseloco, Algorithm::sparseloco_nesterov, Algorithm::demo_lite}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("algorithm", "unknown algorithm '" + std::string(name) + "'");
}

bool is_sparse(Algorithm algorithm) noexcept {
  return algorithm == Algorithm::sparseloco || algorithm == Algorithm::sparseloco_nesterov ||
         algorithm == Algorithm::demo_lite;
}

double default_outer_beta(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::diloco_sgd: return 0.0;
    case Algorithm::sparseloco:
    case Algorithm::sparseloco_nesterov: return 0.95;
    case Algorithm::demo_lite: return 0.999;
    default: return 0.9;
  }
}

double default_inner_lr(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::diloco:
    case Algorithm::diloco_lom:
    case Algorithm::diloco_lom_subk: return 8e-4;
    default: return 1e-3;
  }
}

std::string_view to_string(Precision precision) noexcept { return precision == Precision::f64 ? "f64" : "f32"; }

CompressorSpec CompressionConfig::compressor() const {
  CompressorSpec spec;
  spec.chunk_size = chunk_size;
  spec.k = k;
  spec.quant = QuantSpec{bits};
  spec.selection = selection;
  spec.chunking = chunking;
  spec.dct = dct;
  return spec;
}

std::vector<std::size_t> RunConfig::layer_dims() const {
  std::vector<std::size_t> dims{data.input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(data.n_classes);
  return dims;
}

SyntheticSpec RunConfig::synthetic_spec() const {
  SyntheticSpec spec;
  spec.seed = data.seed;
  spec.n_samples = data.n_samples;
  spec.input_dim = data.input_dim;
  spec.n_classes = data.n_classes;
  spec.teacher_depth = data.teacher_depth;
  spec.teacher_width = data.teacher_width;
  spec.num_shards = replicas;
  return spec;
}

LrSchedule RunConfig::inner_schedule() const {
  return LrSchedule{inner.lr, inner.warmup_steps, total_inner_steps(), inner.min_lr_ratio};
}

Topology RunConfig::effective_topology() const noexcept {
  if (topology) return *topology;
  if (replicas < 2) return Topology::parameter_server;
  return is_sparse(algorithm) ? Topology::ring_all_gather : Topology::ring_all_reduce;
}

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "expected an object");
  }

  std::string field(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  bool has(std::string_view key) const { return obj_.contains(key); }

  const json& raw(std::string_view key) {
    seen_.insert(std::string(key));
    return obj_.at(std::string(key));
  }

  template <typename V>
  void get(std::string_view key, V& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    try {
      if constexpr (std::is_same_v<V, bool>) {
        if (!v.is_boolean()) throw ConfigError(field(key), "expected a boolean");
        out = v.get<bool>();
      } else if constexpr (std::is_integral_v<V>) {
        if (!v.is_number_integer() || v.get<long long>() < 0) {
          throw ConfigError(field(key), "expected a non-negative integer");
        }
        out = v.get<V>();
      } else if constexpr (std::is_floating_point_v<V>) {
        if (!v.is_number()) throw ConfigError(field(key), "expected a number");
        out = v.get<V>();
      } else {
        if (!v.is_string()) throw ConfigError(field(key), "expected a string");
        out = v.get<V>();
      }
    } catch (const json::exception& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  Section sub(std::string_view key) { return Section(raw(key), field(key)); }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) throw ConfigError(field(key), "unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

template <typename V>
std::vector<V> get_list(Section& s, std::string_view key) {
  const json& v = s.raw(key);
  if (!v.is_array()) throw ConfigError(s.field(key), "expected an array");
  std::vector<V> out;
  for (const auto& item : v) {
    if constexpr (std::is_integral_v<V>) {
      if (!item.is_number_integer() || item.get<long long>() < 0) {
        throw ConfigError(s.field(key), "expected non-negative integers");
      }
    } else {
      if (!item.is_number()) throw ConfigError(s.field(key), "expected numbers");
    }
    out.push_back(item.get<V>());
  }
  return out;
}

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

std::string density_tag(double density) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", density * 100.0);
  return buf;
}

}  // namespace

void validate(const RunConfig& c) {
  require(!c.name.empty(), "name", "must not be empty");
  require(!c.hidden.empty(), "model.hidden", "needs at least one hidden layer");
  for (auto h : c.hidden) require(h > 0, "model.hidden", "layer widths must be positive");
  require(c.data.input_dim > 0, "data.input_dim", "must be positive");
  require(c.data.n_classes >= 2, "data.n_classes", "must be at least 2");
  require(c.data.teacher_depth >= 1, "data.teacher_depth", "must be at least 1");
  require(c.data.teacher_width > 0, "data.teacher_width", "must be positive");
  require(c.data.eval_samples > 0, "data.eval_samples", "must be positive");
  require(c.replicas >= 1, "replicas", "must be at least 1");
  require(c.data.n_samples >= c.replicas, "data.n_samples", "needs at least one sample per replica");
  require(c.inner_steps >= 1, "inner_steps", "must be at least 1");
  require(c.outer_steps >= 1, "outer_steps", "must be at least 1");
  if (c.algorithm == Algorithm::demo_lite) {
    require(c.inner_steps == 1, "inner_steps", "demo-lite runs one step per sync (H = 1)");
  }

  require(c.inner.lr > 0.0, "inner.lr", "must be positive");
  require(c.inner.warmup_steps <= c.total_inner_steps(), "inner.warmup_steps", "exceeds the total step budget");
  require(c.inner.min_lr_ratio >= 0.0 && c.inner.min_lr_ratio <= 1.0, "inner.min_lr_ratio", "must lie in [0, 1]");
  require(c.inner.adamw.beta1 >= 0.0 && c.inner.adamw.beta1 < 1.0, "inner.beta1", "must lie in [0, 1)");
  require(c.inner.adamw.beta2 >= 0.0 && c.inner.adamw.beta2 < 1.0, "inner.beta2", "must lie in [0, 1)");
  require(c.inner.adamw.eps > 0.0, "inner.eps", "must be positive");
  require(c.inner.adamw.weight_decay >= 0.0, "inner.weight_decay", "must be non-negative");
  require(c.inner.clip > 0.0, "inner.clip", "must be positive");
  require(c.inner.batch_size >= 1, "inner.batch_size", "must be at least 1");

  require(c.outer.lr.has_value(), "outer.lr", "missing (the outer learning rate has no default)");
  require(*c.outer.lr > 0.0 && std::isfinite(*c.outer.lr), "outer.lr", "must be positive");
  require(c.outer.beta >= 0.0 && c.outer.beta < 1.0, "outer.beta", "must lie in [0, 1)");
  require(c.outer.nesterov_beta >= 0.0 && c.outer.nesterov_beta < 1.0, "outer.nesterov_beta", "must lie in [0, 1)");
  require(c.outer.subk_fraction >= 0.0 && c.outer.subk_fraction <= 1.0, "outer.subk_fraction", "must lie in [0, 1]");

  require(c.compression.chunk_size >= 1, "compression.chunk_size", "must be positive");
  require(c.compression.k >= 1 && c.compression.k <= c.compression.chunk_size, "compression.k",
          "must lie in [1, chunk_size]");
  validate(QuantSpec{c.compression.bits});

  if (c.topology && *c.topology != Topology::parameter_server) {
    require(c.replicas >= 2, "topology", "ring topologies need at least 2 replicas");
  }
  require(c.cosine_steps >= 1, "cosine_steps", "must be at least 1");
  require(c.eval_every >= 1, "eval_every", "must be at least 1");
  for (double d : c.sweep.densities) {
    require(d > 0.0 && d <= 1.0, "sweep.densities", "densities must lie in (0, 1]");
    require(std::llround(d * static_cast<double>(c.compression.chunk_size)) >= 1, "sweep.densities",
            "density rounds to k = 0 at this chunk size");
  }
}

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  Section top(root, "");
  RunConfig c;
  top.get("name", c.name);
  if (top.has("algorithm")) {
    std::string name;
    top.get("algorithm", name);
    c.algorithm = algorithm_from_string(name);
  }
  c.outer.beta = default_outer_beta(c.algorithm);
  c.inner.lr = default_inner_lr(c.algorithm);

  if (top.has("model")) {
    Section s = top.sub("model");
    if (s.has("hidden")) c.hidden = get_list<std::size_t>(s, "hidden");
    s.finish();
  }
  if (top.has("data")) {
    Section s = top.sub("data");
    s.get("seed", c.data.seed);
    s.get("n_samples", c.data.n_samples);
    s.get("input_dim", c.data.input_dim);
    s.get("n_classes", c.data.n_classes);
    s.get("teacher_depth", c.data.teacher_depth);
    s.get("teacher_width", c.data.teacher_width);
    s.get("eval_samples", c.data.eval_samples);
    s.finish();
  }
  top.get("replicas", c.replicas);
  top.get("inner_steps", c.inner_steps);
  top.get("outer_steps", c.outer_steps);
  if (top.has("inner")) {
    Section s = top.sub("inner");
    s.get("lr", c.inner.lr);
    s.get("warmup_steps", c.inner.warmup_steps);
    s.get("min_lr_ratio", c.inner.min_lr_ratio);
    s.get("beta1", c.inner.adamw.beta1);
    s.get("beta2", c.inner.adamw.beta2);
    s.get("eps", c.inner.adamw.eps);
    s.get("weight_decay", c.inner.adamw.weight_decay);
    s.get("clip", c.inner.clip);
    s.get("batch_size", c.inner.batch_size);
    s.finish();
  }
  if (top.has("outer")) {
    Section s = top.sub("outer");
    if (s.has("lr")) {
      double lr = 0.0;
      s.get("lr", lr);
      c.outer.lr = lr;
    }
    s.get("beta", c.outer.beta);
    s.get("nesterov_beta", c.outer.nesterov_beta);
    s.get("subk_fraction", c.outer.subk_fraction);
    s.finish();
  }
  if (top.has("compression")) {
    Section s = top.sub("compression");
    auto& cc = c.compression;
    s.get("chunk_size", cc.chunk_size);
    const bool has_k = s.has("k");
    s.get("k", cc.k);
    if (s.has("density")) {
      double density = 0.0;
      s.get("density", density);
      if (!(density > 0.0 && density <= 1.0)) throw ConfigError("compression.density", "must lie in (0, 1]");
      const auto k = static_cast<std::size_t>(std::llround(density * static_cast<double>(cc.chunk_size)));
      if (has_k && k != cc.k) {
        throw ConfigError("compression.density", "inconsistent with compression.k (round(density * C) = " +
                                                     std::to_string(k) + ")");
      }
      cc.k = k;
    }
    s.get("bits", cc.bits);
    if (s.has("index_codec")) {
      std::string name;
      s.get("index_codec", name);
      cc.codec = index_codec_from_string(name);
    }
    if (s.has("selection")) {
      std::string name;
      s.get("selection", name);
      if (name == "topk") cc.selection = SelectionKind::topk;
      else if (name == "randk") cc.selection = SelectionKind::randk;
      else throw ConfigError("compression.selection", "expected 'topk' or 'randk'");
    }
    s.get("chunking", cc.chunking);
    s.get("dct", cc.dct);
    s.get("verify_wire", cc.verify_wire);
    s.finish();
  }
  if (top.has("topology")) {
    std::string name;
    top.get("topology", name);
    if (name == "auto") c.topology.reset();
    else c.topology = topology_from_string(name);
  }
  if (top.has("precision")) {
    std::string name;
    top.get("precision", name);
    if (name == "f32") c.precision = Precision::f32;
    else if (name == "f64") c.precision = Precision::f64;
    else throw ConfigError("precision", "expected 'f32' or 'f64'");
  }
  top.get("seed", c.seed);
  top.get("cosine_steps", c.cosine_steps);
  top.get("eval_every", c.eval_every);
  top.get("output_dir", c.output_dir);
  if (top.has("sweep")) {
    Section s = top.sub("sweep");
    if (s.has("densities")) c.sweep.densities = get_list<double>(s, "densities");
    if (s.has("seeds")) c.sweep.seeds = get_list<std::uint64_t>(s, "seeds");
    s.finish();
  }
  top.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_json(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  j["algorithm"] = std::string(to_string(c.algorithm));
  j["model"] = {{"hidden", c.hidden}};
  j["data"] = {{"seed", c.data.seed},
               {"n_samples", c.data.n_samples},
               {"input_dim", c.data.input_dim},
               {"n_classes", c.data.n_classes},
               {"teacher_depth", c.data.teacher_depth},
               {"teacher_width", c.data.teacher_width},
               {"eval_samples", c.data.eval_samples}};
  j["replicas"] = c.replicas;
  j["inner_steps"] = c.inner_steps;
  j["outer_steps"] = c.outer_steps;
  j["inner"] = {{"lr", c.inner.lr},
                {"warmup_steps", c.inner.warmup_steps},
                {"min_lr_ratio", c.inner.min_lr_ratio},
                {"beta1", c.inner.adamw.beta1},
                {"beta2", c.inner.adamw.beta2},
                {"eps", c.inner.adamw.eps},
                {"weight_decay", c.inner.adamw.weight_decay},
                {"clip", c.inner.clip},
                {"batch_size", c.inner.batch_size}};
  json outer = {{"beta", c.outer.beta},
                {"nesterov_beta", c.outer.nesterov_beta},
                {"subk_fraction", c.outer.subk_fraction}};
  if (c.outer.lr) outer["lr"] = *c.outer.lr;
  j["outer"] = outer;
  const auto& cc = c.compression;
  j["compression"] = {{"chunk_size", cc.chunk_size},
                      {"k", cc.k},
                      {"bits", cc.bits},
                      {"index_codec", std::string(to_string(cc.codec))},
                      {"selection", cc.selection == SelectionKind::topk ? "topk" : "randk"},
                      {"chunking", cc.chunking},
                      {"dct", cc.dct},
                      {"verify_wire", cc.verify_wire}};
  j["topology"] = c.topology ? std::string(to_string(*c.topology)) : std::string("auto");
  j["precision"] = std::string(to_string(c.precision));
  j["seed"] = c.seed;
  j["cosine_steps"] = c.cosine_steps;
  j["eval_every"] = c.eval_every;
  j["output_dir"] = c.output_dir;
  if (!c.sweep.empty()) {
    json sweep = json::object();
    if (!c.sweep.densities.empty()) sweep["densities"] = c.sweep.densities;
    if (!c.sweep.seeds.empty()) sweep["seeds"] = c.sweep.seeds;
    j["sweep"] = sweep;
  }
  return j.dump(2) + "\n";
}

std::vector<RunConfig> expand_sweep(const RunConfig& config) {
  if (config.sweep.empty()) return {config};
  std::vector<std::optional<double>> densities;
  for (double d : config.sweep.densities) densities.emplace_back(d);
  if (densities.empty()) densities.emplace_back();
  std::vector<std::optional<std::uint64_t>> seeds;
  for (auto s : config.sweep.seeds) seeds.emplace_back(s);
  if (seeds.empty()) seeds.emplace_back();

  std::vector<RunConfig> arms;
  for (const auto& d : densities) {
    for (const auto& s : seeds) {
      RunConfig arm = config;
      arm.sweep = {};
      if (d) {
        arm.compression.k =
            static_cast<std::size_t>(std::llround(*d * static_cast<double>(config.compression.chunk_size)));
        arm.name += "_d" + density_tag(*d);
      }
      if (s) {
        arm.seed = *s;
        arm.name += "_s" + std::to_string(*s);
      }
      validate(arm);
      arms.push_back(std::move(arm));
    }
  }
  return arms;
}

RunConfig toy_preset(Algorithm algorithm) {
  RunConfig c;
  c.name = std::string(to_string(algorithm));
  c.algorithm = algorithm;
  c.hidden = {128, 128};
  c.data = DataConfig{};
  c.replicas = 8;
  c.inner_steps = algorithm == Algorithm::demo_lite ? 1 : 15;
  c.outer_steps = algorithm == Algorithm::demo_lite ? 2000 : 133;
  c.inner.lr = default_inner_lr(algorithm);
  c.inner.warmup_steps = 50;
  c.inner.batch_size = 32;
  c.outer.beta = default_outer_beta(algorithm);
  switch (algorithm) {
    case Algorithm::diloco:
    case Algorithm::diloco_lom:
    case Algorithm::diloco_lom_subk: c.outer.lr = 0.6; break;
    case Algorithm::demo_lite: c.outer.lr = 1e-3; break;
    case Algorithm::sparseloco:
    case Algorithm::sparseloco_nesterov:
      // At 3% density the toy run is step-size limited with the dense
      // settings; a larger inner and outer step reaches the noise floor.
      c.inner.lr = 3e-3;
      c.outer.lr = 2.0;
      break;
    default: c.outer.lr = 1.0; break;
  }
  c.compression.chunk_size = 256;
  c.compression.k = 8;
  c.compression.bits = 2;
  c.eval_every = 10;
  return c;
}

}  // namespace sparseloco
