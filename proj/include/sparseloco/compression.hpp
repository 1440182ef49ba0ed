// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sparseloco/rng.hpp"
#include "sparseloco/tensor.hpp"

namespace sparseloco {

/// Per-chunk sparse selection, stored flat. Chunk c owns entries
/// [offsets[c], offsets[c+1]) of `indices` / `values`; indices are local to
/// the chunk and strictly increasing.
template <std::floating_point T>
struct SelectionResult {
  ChunkLayout layout;
  std::size_t k = 0;
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> indices;
  std::vector<T> values;

  std::size_t num_chunks() const noexcept { return layout.num_chunks; }
  std::span<const std::uint32_t> chunk_indices(std::size_t c) const noexcept {
    return {indices.data() + offsets[c], offsets[c + 1] - offsets[c]};
  }
  std::span<const T> chunk_values(std::size_t c) const noexcept {
    return {values.data() + offsets[c], offsets[c + 1] - offsets[c]};
  }
  /// Dense vector with the selected entries and zeros elsewhere.
  std::vector<T> to_dense() const;
};

/// Entries selected in a chunk of length `chunk_len` for a nominal k.
inline std::size_t effective_k(std::size_t k, std::size_t chunk_len) noexcept {
  return k < chunk_len ? k : chunk_len;
}

/// The k largest-magnitude entries of each chunk; equal magnitudes are broken
/// towards the lower index.
template <std::floating_point T>
SelectionResult<T> chunk_topk(std::span<const T> v, const ChunkLayout& layout, std::size_t k);

/// k indices per chunk drawn uniformly without replacement from `rng`.
template <std::floating_point T>
SelectionResult<T> chunk_randk(std::span<const T> v, const ChunkLayout& layout, std::size_t k, Rng& rng);

/// Orthonormal DCT-II of one chunk (naive O(n^2) with an exact angle table).
template <std::floating_point T>
std::vector<T> dct_chunk(std::span<const T> chunk);

/// Inverse of dct_chunk (orthonormal DCT-III).
template <std::floating_point T>
std::vector<T> dct_inverse(std::span<const T> coeffs);

/// Apply dct_chunk / dct_inverse block-wise with the given layout.
template <std::floating_point T>
std::vector<T> dct_blocks(std::span<const T> v, const ChunkLayout& layout, bool inverse);

// ---------------------------------------------------------------------------
// Quantization
// ---------------------------------------------------------------------------

/// Value bit width. 32 is pass-through; 1 is sign + shared magnitude; 2..4
/// are symmetric mid-rise uniform quantizers over [-s, s].
struct QuantSpec {
  unsigned bits = 2;

  bool passthrough() const noexcept { return bits == 32; }
  std::size_t levels() const noexcept { return std::size_t{1} << bits; }
  bool operator==(const QuantSpec&) const = default;
};

bool is_supported_bits(unsigned bits) noexcept;
void validate(const QuantSpec& spec);

/// Quantized values of one chunk. `scale_half` is the binary16 scale stored on
/// the wire; `raw` is populated only for pass-through.
template <std::floating_point T>
struct QuantizedChunk {
  std::vector<std::uint8_t> codes;
  std::uint16_t scale_half = 0;
  std::vector<T> raw;

  double scale() const noexcept;
};

/// For bits in {2,3,4}: s = chunk absmax rounded up to binary16, 2^b equal
/// bins on [-s, s], code = bin index. For bits == 1: code = (value >= 0),
/// s = mean |value| (nearest binary16). bits == 32 copies values.
/// An all-zero chunk yields s = 0 and all codes 0.
template <std::floating_point T>
QuantizedChunk<T> quantize(std::span<const T> values, const QuantSpec& spec);

/// Maps codes back to bin centres (or +/- s for 1 bit).
template <std::floating_point T>
std::vector<T> dequantize(const QuantizedChunk<T>& q, const QuantSpec& spec);

// ---------------------------------------------------------------------------
// Full compression operator
// ---------------------------------------------------------------------------

enum class SelectionKind : std::uint8_t { topk, randk };

struct CompressorSpec {
  std::size_t chunk_size = 4096;
  std::size_t k = 128;
  QuantSpec quant{};
  SelectionKind selection = SelectionKind::topk;
  /// false: one selection over the whole vector (global Top-k).
  bool chunking = true;
  /// Select in the block-wise DCT domain (blocks of chunk_size).
  bool dct = false;

  bool operator==(const CompressorSpec&) const = default;
};

/// The compressed update a replica transmits: selection layout, indices and
/// quantized values for every chunk.
template <std::floating_point T>
struct CompressedUpdate {
  ChunkLayout layout;
  std::size_t k = 0;
  QuantSpec quant{};
  bool dct = false;
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> indices;
  std::vector<QuantizedChunk<T>> chunks;

  std::size_t selected() const noexcept { return indices.size(); }
};

/// Selection layout used by a compressor for a vector of the given length.
ChunkLayout selection_layout(std::size_t len, const CompressorSpec& spec);
/// Per-chunk k on selection_layout: spec.k, or round(k * len / C) when
/// chunking is off.
std::size_t selection_k(std::size_t len, const CompressorSpec& spec);

/// Q(Select(v)), in the DCT domain when spec.dct is set. `rng` is only used
/// for Random-k and may be null otherwise.
template <std::floating_point T>
CompressedUpdate<T> compress(std::span<const T> v, const CompressorSpec& spec, Rng* rng);

/// Quantize an existing selection.
template <std::floating_point T>
CompressedUpdate<T> quantize_selection(const SelectionResult<T>& sel, const QuantSpec& quant, bool dct);

/// Dense, parameter-domain reconstruction of a compressed update (inverse DCT
/// applied when the update was taken in the DCT domain).
template <std::floating_point T>
std::vector<T> decompress(const CompressedUpdate<T>& update, std::size_t dct_block);

/// out += scale * decompress(update)
template <std::floating_point T>
void accumulate(const CompressedUpdate<T>& update, std::size_t dct_block, T scale, std::span<T> out);

}  // namespace sparseloco
