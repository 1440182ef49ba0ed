// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sparseloco/model.hpp"
#include "sparseloco/rng.hpp"

namespace sparseloco {

struct SyntheticSpec {
  std::uint64_t seed = 1;
  std::size_t n_samples = 16384;
  std::size_t input_dim = 64;
  std::size_t n_classes = 16;
  std::size_t teacher_depth = 2;
  std::size_t teacher_width = 128;
  std::size_t num_shards = 8;

  bool operator==(const SyntheticSpec&) const = default;
};

/// Teacher-labelled Gaussian features split into contiguous, near-equal shards.
///
/// Features are stored as 32-bit floats regardless of the model's scalar type.
class ShardedDataset {
 public:
  ShardedDataset(std::size_t input_dim, std::size_t n_classes, std::size_t num_shards,
                 std::vector<float> inputs, std::vector<std::uint32_t> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t num_classes() const noexcept { return n_classes_; }
  std::size_t num_shards() const noexcept { return num_shards_; }

  /// Global sample range [begin, end) owned by shard r.
  std::pair<std::size_t, std::size_t> shard_range(std::size_t r) const;
  std::size_t shard_size(std::size_t r) const;
  std::size_t shard_of(std::size_t sample) const;

  std::span<const float> features(std::size_t sample) const noexcept {
    return {inputs_.data() + sample * input_dim_, input_dim_};
  }
  std::uint32_t label(std::size_t sample) const noexcept { return labels_[sample]; }

  const std::vector<float>& inputs() const noexcept { return inputs_; }
  const std::vector<std::uint32_t>& labels() const noexcept { return labels_; }

  bool operator==(const ShardedDataset&) const = default;

 private:
  std::size_t input_dim_;
  std::size_t n_classes_;
  std::size_t num_shards_;
  std::vector<float> inputs_;
  std::vector<std::uint32_t> labels_;
};

/// Inputs ~ N(0, I); labels = argmax of a fixed random GELU teacher network
/// whose logits are centred per class over the generated sample so classes are
/// roughly balanced. Deterministic in `spec.seed`.
ShardedDataset generate_synthetic(const SyntheticSpec& spec);

/// A second, disjoint draw from the same teacher, used as a held-out set.
ShardedDataset generate_heldout(const SyntheticSpec& spec, std::size_t n_samples);

/// Owned, model-precision copy of a batch.
template <std::floating_point T>
struct Batch {
  std::vector<T> inputs;
  std::vector<std::uint32_t> labels;
  BatchView<T> view() const noexcept { return {inputs, labels}; }
};

/// Gather the given sample ids into a batch.
template <std::floating_point T>
Batch<T> gather_batch(const ShardedDataset& data, std::span<const std::size_t> ids);

/// Draw `batch_size` samples uniformly with replacement from shard r.
template <std::floating_point T>
Batch<T> sample_batch(const ShardedDataset& data, std::size_t shard, std::size_t batch_size, Rng& rng);

/// Whole dataset as one batch.
template <std::floating_point T>
Batch<T> full_batch(const ShardedDataset& data);

// Binary layout (all little-endian):
//   magic "SLDS" | u32 version=1 | u32 n_samples | u32 input_dim | u32 n_classes | u32 num_shards
//   f32 inputs[n_samples * input_dim] | u32 labels[n_samples]
void save_dataset(const ShardedDataset& data, const std::filesystem::path& path);
ShardedDataset load_dataset(const std::filesystem::path& path);

}  // namespace sparseloco
