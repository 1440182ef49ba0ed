// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "sparseloco/errors.hpp"

namespace sparseloco {

namespace {

// Stream ids inside the dataset seed's key space.
constexpr std::uint64_t kTeacherStream = 0x7eac4e5;
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kHeldoutStream = 2;
constexpr std::uint64_t kCalibrationStream = 3;
constexpr std::size_t kCalibrationSamples = 8192;

struct Teacher {
  MlpShape shape;
  ParamVector<double> params;
  std::vector<double> class_offset;
};

MlpShape teacher_shape(const SyntheticSpec& spec) {
  std::vector<std::size_t> dims{spec.input_dim};
  for (std::size_t i = 0; i < spec.teacher_depth; ++i) dims.push_back(spec.teacher_width);
  dims.push_back(spec.n_classes);
  return MlpShape(std::move(dims));
}

std::vector<double> draw_features(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<double> x(n * dim);
  for (auto& v : x) v = rng.normal();
  return x;
}

std::vector<double> teacher_logits(const Teacher& t, std::span<const double> x, std::size_t n) {
  std::vector<std::uint32_t> dummy(n, 0);
  return forward_logits<double>(t.shape, t.params.span(), BatchView<double>{x, dummy});
}

Teacher make_teacher(const SyntheticSpec& spec) {
  Teacher t{teacher_shape(spec), ParamVector<double>(1), {}};
  Rng rng(spec.seed, kTeacherStream);
  t.params = ParamVector<double>(t.shape.num_params());
  const auto& dims = t.shape.layer_dims();
  for (std::size_t l = 0; l < t.shape.num_layers(); ++l) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(dims[l]));
    const std::size_t w0 = t.shape.weight_offset(l);
    for (std::size_t i = 0; i < dims[l] * dims[l + 1]; ++i) t.params[w0 + i] = stddev * rng.normal();
    const std::size_t b0 = t.shape.bias_offset(l);
    for (std::size_t i = 0; i < dims[l + 1]; ++i) t.params[b0 + i] = 0.1 * rng.normal();
  }
  // Centre logits per class on a calibration draw so argmax labels are balanced.
  Rng calib(spec.seed, kCalibrationStream);
  const auto x = draw_features(calib, kCalibrationSamples, spec.input_dim);
  const auto logits = teacher_logits(t, x, kCalibrationSamples);
  t.class_offset.assign(spec.n_classes, 0.0);
  for (std::size_t s = 0; s < kCalibrationSamples; ++s) {
    for (std::size_t c = 0; c < spec.n_classes; ++c) t.class_offset[c] += logits[s * spec.n_classes + c];
  }
  for (auto& o : t.class_offset) o /= static_cast<double>(kCalibrationSamples);
  return t;
}

ShardedDataset draw(const SyntheticSpec& spec, std::size_t n, std::uint64_t stream) {
  if (n == 0 || spec.input_dim == 0 || spec.n_classes == 0 || spec.num_shards == 0) {
    throw ConfigError("data", "all dataset counts must be positive");
  }
  const Teacher teacher = make_teacher(spec);
  Rng rng(spec.seed, stream);
  const auto x = draw_features(rng, n, spec.input_dim);
  const auto logits = teacher_logits(teacher, x, n);
  std::vector<std::uint32_t> labels(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t best = 0;
    double best_v = -INFINITY;
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
      const double v = logits[s * spec.n_classes + c] - teacher.class_offset[c];
      if (v > best_v) {
        best_v = v;
        best = c;
      }
    }
    labels[s] = static_cast<std::uint32_t>(best);
  }
  std::vector<float> inputs(x.begin(), x.end());
  return ShardedDataset(spec.input_dim, spec.n_classes, spec.num_shards, std::move(inputs), std::move(labels));
}

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<unsigned char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw FormatError("dataset file truncated");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

ShardedDataset::ShardedDataset(std::size_t input_dim, std::size_t n_classes, std::size_t num_shards,
                               std::vector<float> inputs, std::vector<std::uint32_t> labels)
    : input_dim_(input_dim),
      n_classes_(n_classes),
      num_shards_(num_shards),
      inputs_(std::move(inputs)),
      labels_(std::move(labels)) {
  if (input_dim_ == 0 || n_classes_ == 0 || num_shards_ == 0) {
    throw DimensionError("ShardedDataset: dims must be positive");
  }
  if (inputs_.size() != labels_.size() * input_dim_) {
    throw DimensionError("ShardedDataset: inputs size does not match labels * input_dim");
  }
  if (labels_.size() < num_shards_) throw DimensionError("ShardedDataset: fewer samples than shards");
  for (auto y : labels_) {
    if (y >= n_classes_) throw DimensionError("ShardedDataset: label out of range");
  }
}

std::pair<std::size_t, std::size_t> ShardedDataset::shard_range(std::size_t r) const {
  if (r >= num_shards_) throw DimensionError("ShardedDataset: shard index out of range");
  const std::size_t n = labels_.size();
  return {r * n / num_shards_, (r + 1) * n / num_shards_};
}

std::size_t ShardedDataset::shard_size(std::size_t r) const {
  const auto [b, e] = shard_range(r);
  return e - b;
}

std::size_t ShardedDataset::shard_of(std::size_t sample) const {
  // Largest r with floor(r * n / R) <= sample.
  const std::size_t n = labels_.size();
  std::size_t r = std::min(num_shards_ - 1, (sample * num_shards_) / n);
  while (r + 1 < num_shards_ && shard_range(r + 1).first <= sample) ++r;
  while (shard_range(r).first > sample) --r;
  return r;
}

ShardedDataset generate_synthetic(const SyntheticSpec& spec) { return draw(spec, spec.n_samples, kTrainStream); }

ShardedDataset generate_heldout(const SyntheticSpec& spec, std::size_t n_samples) {
  SyntheticSpec one_shard = spec;
  one_shard.num_shards = 1;
  return draw(one_shard, n_samples, kHeldoutStream);
}

template <std::floating_point T>
Batch<T> gather_batch(const ShardedDataset& data, std::span<const std::size_t> ids) {
  Batch<T> batch;
  const std::size_t d = data.input_dim();
  batch.inputs.resize(ids.size() * d);
  batch.labels.resize(ids.size());
  for (std::size_t j = 0; j < ids.size(); ++j) {
    const auto f = data.features(ids[j]);
    std::copy(f.begin(), f.end(), batch.inputs.begin() + static_cast<std::ptrdiff_t>(j * d));
    batch.labels[j] = data.label(ids[j]);
  }
  return batch;
}

template <std::floating_point T>
Batch<T> sample_batch(const ShardedDataset& data, std::size_t shard, std::size_t batch_size, Rng& rng) {
  const auto [begin, end] = data.shard_range(shard);
  std::vector<std::size_t> ids(batch_size);
  for (auto& id : ids) id = begin + static_cast<std::size_t>(rng.uniform_index(end - begin));
  return gather_batch<T>(data, ids);
}

template <std::floating_point T>
Batch<T> full_batch(const ShardedDataset& data) {
  Batch<T> batch;
  batch.inputs.assign(data.inputs().begin(), data.inputs().end());
  batch.labels = data.labels();
  return batch;
}

void save_dataset(const ShardedDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write("SLDS", 4);
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.input_dim()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.num_classes()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.num_shards()));
  for (float f : data.inputs()) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_le<std::uint32_t>(out, bits);
  }
  for (auto y : data.labels()) put_le<std::uint32_t>(out, y);
  if (!out) throw FormatError("write failed for " + path.string());
}

ShardedDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SLDS", 4) != 0) throw FormatError("bad dataset magic");
  if (get_le<std::uint32_t>(in) != 1) throw FormatError("unsupported dataset version");
  const std::size_t n = get_le<std::uint32_t>(in);
  const std::size_t dim = get_le<std::uint32_t>(in);
  const std::size_t classes = get_le<std::uint32_t>(in);
  const std::size_t shards = get_le<std::uint32_t>(in);
  std::vector<float> inputs(n * dim);
  for (auto& f : inputs) {
    const auto bits = get_le<std::uint32_t>(in);
    std::memcpy(&f, &bits, sizeof f);
  }
  std::vector<std::uint32_t> labels(n);
  for (auto& y : labels) y = get_le<std::uint32_t>(in);
  return ShardedDataset(dim, classes, shards, std::move(inputs), std::move(labels));
}

#define SPARSELOCO_INSTANTIATE(T)                                                                  \
  template Batch<T> gather_batch<T>(const ShardedDataset&, std::span<const std::size_t>);         \
  template Batch<T> sample_batch<T>(const ShardedDataset&, std::size_t, std::size_t, Rng&);       \
  template Batch<T> full_batch<T>(const ShardedDataset&);

SPARSELOCO_INSTANTIATE(float)
SPARSELOCO_INSTANTIATE(double)

#undef SPARSELOCO_INSTANTIATE

}  // namespace sparseloco
