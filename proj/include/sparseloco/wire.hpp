// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sparseloco/compression.hpp"
#include "sparseloco/index_codec.hpp"

namespace sparseloco {

// Sparse message format, version 1.
//
// Header, 32 bytes, little-endian fixed-width fields:
//   off  size  field
//     0     4  magic "SLCM"
//     4     2  version (= 1)
//     6     1  value_bits b  (1, 2, 3, 4 or 32)
//     7     1  index codec   (0 = naive, 1 = enumerative)
//     8     1  flags         (bit 0: values are block-DCT coefficients)
//     9     3  reserved, zero
//    12     8  param_len N
//    20     4  chunk_size C
//    24     4  k
//    28     4  num_chunks = ceil(N / C)
//
// Body: one MSB-first bit stream, chunk after chunk, zero-padded to a whole
// byte only at the end of the message. For chunk c with length C_c and
// k_c = min(k, C_c):
//   16 bits           scale, IEEE binary16 (zero when b == 32)
//   index payload     naive: k_c * ceil(log2 C_c) bits, each index MSB first
//                     enumerative: ceil(log2 binom(C_c, k_c)) bits, the subset
//                     rank MSB first
//   k_c * b bits      value codes in index order (b == 32: IEEE binary32 bits)
// Chunks with k_c == 0 (only when k == 0) contribute no bits at all.
//
// Total length = 32 + ceil(sum_c (16 + index_bits_c + k_c * b) / 8) bytes.

inline constexpr std::size_t kWireHeaderBytes = 32;
inline constexpr std::uint16_t kWireVersion = 1;

struct WireHeader {
  std::uint16_t version = kWireVersion;
  std::uint8_t value_bits = 2;
  IndexCodec codec = IndexCodec::enumerative;
  bool dct = false;
  std::uint64_t param_len = 0;
  std::uint32_t chunk_size = 0;
  std::uint32_t k = 0;
  std::uint32_t num_chunks = 0;

  bool operator==(const WireHeader&) const = default;
};

/// Decoded message: header plus per-chunk indices, scales and codes. For
/// b == 32 the float32 values are kept in `raw`.
struct SparseMessage {
  WireHeader header;
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> indices;
  std::vector<std::uint16_t> scales;
  std::vector<std::uint8_t> codes;
  std::vector<float> raw;

  /// Dense dequantized vector in the coded domain (no inverse DCT).
  std::vector<double> dequantized() const;
  bool operator==(const SparseMessage&) const = default;
};

/// Serializes a compressed update; 64-bit pass-through values are narrowed to
/// binary32 on the wire.
template <std::floating_point T>
std::vector<std::uint8_t> serialize(const CompressedUpdate<T>& update, IndexCodec codec);

SparseMessage deserialize(std::span<const std::uint8_t> bytes);

/// The update as the receiver reconstructs it from a message.
template <std::floating_point T>
CompressedUpdate<T> to_update(const SparseMessage& message);

/// Exact serialized length without building the message.
std::uint64_t message_size_bytes(std::uint64_t param_len, std::size_t chunk_size, std::size_t k, unsigned value_bits,
                                 IndexCodec codec);

/// Raw dense payload: ceil(N * bits / 8) bytes, no header.
std::uint64_t dense_message_bytes(std::uint64_t param_len, unsigned value_bits);

}  // namespace sparseloco
