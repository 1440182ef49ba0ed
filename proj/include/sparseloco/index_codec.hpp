// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sparseloco/bigint.hpp"
#include "sparseloco/bitbuffer.hpp"

namespace sparseloco {

/// Strictly increasing positions inside one chunk of size C.
class IndexSet {
 public:
  IndexSet(std::size_t chunk_size, std::vector<std::uint32_t> indices);

  std::size_t chunk_size() const noexcept { return chunk_size_; }
  std::size_t k() const noexcept { return indices_.size(); }
  const std::vector<std::uint32_t>& indices() const noexcept { return indices_; }
  bool operator==(const IndexSet&) const = default;

 private:
  std::size_t chunk_size_;
  std::vector<std::uint32_t> indices_;
};

enum class IndexCodec : std::uint8_t { naive = 0, enumerative = 1 };

std::string_view to_string(IndexCodec codec) noexcept;
IndexCodec index_codec_from_string(std::string_view name);

/// ceil(log2 C): bits per index for fixed-width coding (0 when C == 1).
unsigned naive_index_width(std::size_t chunk_size);

/// ceil(log2 binom(C, k)), exact (big-integer). Memoized per (C, k).
std::size_t enumerative_width(std::size_t chunk_size, std::size_t k);

/// Payload bits of one chunk's index set under `codec`.
std::size_t index_payload_bits(std::size_t chunk_size, std::size_t k, IndexCodec codec);

/// Lexicographic combinatorial rank: sum_j binom(i_j, j + 1) over the sorted
/// indices. Bijective onto [0, binom(C, k)).
BigUint subset_rank(std::span<const std::uint32_t> indices);
std::vector<std::uint32_t> subset_unrank(BigUint rank, std::size_t chunk_size, std::size_t k);

void encode_naive(const IndexSet& set, BitWriter& out);
IndexSet decode_naive(BitReader& in, std::size_t chunk_size, std::size_t k);

/// Writes the rank in exactly enumerative_width(C, k) bits, MSB first.
void encode_enumerative(const IndexSet& set, BitWriter& out);
IndexSet decode_enumerative(BitReader& in, std::size_t chunk_size, std::size_t k);

void encode_indices(const IndexSet& set, IndexCodec codec, BitWriter& out);
IndexSet decode_indices(BitReader& in, std::size_t chunk_size, std::size_t k, IndexCodec codec);

/// log2 binom(C, k) / k, the information-theoretic floor.
double limit_bits_per_value(std::size_t chunk_size, std::size_t k);
/// Payload bits / k for the given codec.
double bits_per_value(std::size_t chunk_size, std::size_t k, IndexCodec codec);

}  // namespace sparseloco
