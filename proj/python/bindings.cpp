// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <span>
#include <string>
#include <vector>

#include "sparseloco/compression.hpp"
#include "sparseloco/config.hpp"
#include "sparseloco/errors.hpp"
#include "sparseloco/harness.hpp"
#include "sparseloco/index_codec.hpp"
#include "sparseloco/rng.hpp"
#include "sparseloco/simulator.hpp"
#include "sparseloco/wire.hpp"

namespace py = pybind11;
using namespace sparseloco;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> as_span(const Array& a) {
  if (a.ndim() != 1) throw DimensionError("expected a 1-D array");
  return {a.data(), static_cast<std::size_t>(a.size())};
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

CompressorSpec make_spec(std::size_t chunk_size, std::size_t k, unsigned bits, const std::string& selection,
                         bool chunking, bool dct) {
  CompressorSpec spec;
  spec.chunk_size = chunk_size;
  spec.k = k;
  spec.quant = QuantSpec{bits};
  if (selection != "topk" && selection != "randk") throw ConfigError("selection", "must be topk or randk");
  spec.selection = selection == "randk" ? SelectionKind::randk : SelectionKind::topk;
  spec.chunking = chunking;
  spec.dct = dct;
  validate(spec.quant);
  return spec;
}

CompressedUpdate<double> do_compress(const Array& values, const CompressorSpec& spec, std::uint64_t seed) {
  Rng rng(seed, kSelectStreamBase);
  return compress<double>(as_span(values), spec, spec.selection == SelectionKind::randk ? &rng : nullptr);
}

py::dict log_to_dict(const MetricsLog& log) {
  py::dict d;
  d["csv"] = log.to_csv(true);
  d["final_eval_loss"] = log.final_eval_loss();
  d["bytes_per_worker"] = log.total_bytes_per_worker();
  std::vector<double> losses;
  for (const auto& r : log.rows) losses.push_back(r.mean_loss);
  d["train_loss"] = losses;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Simulator for communication-efficient low-communication training.";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UndefinedSimilarity>(m, "UndefinedSimilarity", PyExc_ArithmeticError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  m.def(
      "preset", [](const std::string& algorithm) { return to_json(toy_preset(algorithm_from_string(algorithm))); },
      py::arg("algorithm"), "Toy preset for an algorithm, as a JSON config string.");

  m.def(
      "normalize_config", [](const std::string& text) { return to_json(parse_config(text)); }, py::arg("config"),
      "Parses and validates a JSON config, returning it with defaults filled in.");

  m.def(
      "train",
      [](const std::string& text, std::size_t threads) {
        const RunConfig config = parse_config(text);
        MetricsLog log;
        {
          py::gil_scoped_release release;
          log = run(config, threads);
        }
        return log_to_dict(log);
      },
      py::arg("config"), py::arg("threads") = 1, "Runs one simulation and returns its metrics.");

  m.def(
      "compress_decompress",
      [](const Array& values, std::size_t chunk_size, std::size_t k, unsigned bits, const std::string& selection,
         bool chunking, bool dct, std::uint64_t seed) {
        const auto spec = make_spec(chunk_size, k, bits, selection, chunking, dct);
        const auto u = do_compress(values, spec, seed);
        return to_array(decompress<double>(u, spec.chunk_size));
      },
      py::arg("values"), py::arg("chunk_size"), py::arg("k"), py::arg("bits") = 2, py::arg("selection") = "topk",
      py::arg("chunking") = true, py::arg("dct") = false, py::arg("seed") = 0,
      "Compresses a vector and returns its dense reconstruction.");

  m.def(
      "encode",
      [](const Array& values, std::size_t chunk_size, std::size_t k, unsigned bits, const std::string& codec,
         bool dct) {
        const auto spec = make_spec(chunk_size, k, bits, "topk", true, dct);
        const auto bytes = serialize<double>(do_compress(values, spec, 0), index_codec_from_string(codec));
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      },
      py::arg("values"), py::arg("chunk_size"), py::arg("k"), py::arg("bits") = 2, py::arg("codec") = "enumerative",
      py::arg("dct") = false, "Top-k compresses a vector and serializes it to the wire format.");

  m.def(
      "decode",
      [](const py::bytes& data) {
        const std::string s = data;
        const auto msg = deserialize(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
        const auto u = to_update<double>(msg);
        return to_array(decompress<double>(u, msg.header.chunk_size));
      },
      py::arg("data"), "Parses a wire message and returns the dense reconstruction.");

  m.def(
      "message_size_bytes",
      [](std::uint64_t n, std::size_t c, std::size_t k, unsigned bits, const std::string& codec) {
        return message_size_bytes(n, c, k, bits, index_codec_from_string(codec));
      },
      py::arg("param_len"), py::arg("chunk_size"), py::arg("k"), py::arg("bits") = 2,
      py::arg("codec") = "enumerative");

  m.def(
      "bits_per_value",
      [](std::size_t c, std::size_t k, const std::string& codec) {
        return bits_per_value(c, k, index_codec_from_string(codec));
      },
      py::arg("chunk_size"), py::arg("k"), py::arg("codec") = "enumerative");
  m.def("limit_bits_per_value", &limit_bits_per_value, py::arg("chunk_size"), py::arg("k"));

  m.def(
      "comm_report_csv", [] { return comm_report_csv(comm_report()); },
      "Per-topology communication volumes for the reference model sizes.");
  m.def("ablation_suites", &ablation_suites);
}
