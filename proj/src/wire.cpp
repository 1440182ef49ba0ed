// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/wire.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <string>

#include "sparseloco/errors.hpp"
#include "sparseloco/half.hpp"

namespace sparseloco {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'S', 'L', 'C', 'M'};

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename U>
U get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(static_cast<U>(bytes[offset + i]) << (8 * i));
  return value;
}

std::uint64_t chunk_body_bits(std::size_t chunk_len, std::size_t k, unsigned bits, IndexCodec codec) {
  const std::size_t kc = effective_k(k, chunk_len);
  if (kc == 0) return 0;
  return 16 + index_payload_bits(chunk_len, kc, codec) + static_cast<std::uint64_t>(kc) * bits;
}

std::uint64_t body_bits(const ChunkLayout& layout, std::size_t k, unsigned bits, IndexCodec codec) {
  const std::uint64_t full = chunk_body_bits(layout.chunk_size, k, bits, codec);
  return full * (layout.num_chunks - 1) + chunk_body_bits(layout.tail_len, k, bits, codec);
}

void check_bits(unsigned bits) {
  if (!is_supported_bits(bits)) throw FormatError("wire: unsupported value width " + std::to_string(bits));
}

}  // namespace

std::vector<double> SparseMessage::dequantized() const {
  const auto layout = chunk_layout(header.param_len, header.chunk_size);
  std::vector<double> dense(header.param_len, 0.0);
  const QuantSpec spec{header.value_bits};
  for (std::size_t c = 0; c < layout.num_chunks; ++c) {
    QuantizedChunk<double> q;
    const std::size_t begin = offsets[c], end = offsets[c + 1];
    if (spec.passthrough()) {
      q.raw.assign(raw.begin() + static_cast<std::ptrdiff_t>(begin), raw.begin() + static_cast<std::ptrdiff_t>(end));
    } else {
      q.codes.assign(codes.begin() + static_cast<std::ptrdiff_t>(begin), codes.begin() + static_cast<std::ptrdiff_t>(end));
      q.scale_half = scales[c];
    }
    const auto values = dequantize<double>(q, spec);
    for (std::size_t j = 0; j < values.size(); ++j) dense[layout.chunk_begin(c) + indices[begin + j]] = values[j];
  }
  return dense;
}

template <std::floating_point T>
std::vector<std::uint8_t> serialize(const CompressedUpdate<T>& update, IndexCodec codec) {
  const auto& layout = update.layout;
  check_bits(update.quant.bits);
  if (update.offsets.size() != layout.num_chunks + 1 || update.chunks.size() != layout.num_chunks ||
      update.offsets.back() != update.indices.size()) {
    throw DimensionError("serialize: inconsistent chunk metadata");
  }
  std::vector<std::uint8_t> out;
  out.reserve(message_size_bytes(layout.length, layout.chunk_size, update.k, update.quant.bits, codec));
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_le<std::uint16_t>(out, kWireVersion);
  out.push_back(static_cast<std::uint8_t>(update.quant.bits));
  out.push_back(static_cast<std::uint8_t>(codec));
  out.push_back(update.dct ? 1 : 0);
  out.insert(out.end(), 3, 0);
  put_le<std::uint64_t>(out, layout.length);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(layout.chunk_size));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(update.k));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(layout.num_chunks));

  BitWriter body;
  const unsigned bits = update.quant.bits;
  for (std::size_t c = 0; c < layout.num_chunks; ++c) {
    const std::size_t len = layout.chunk_len(c);
    const std::size_t kc = effective_k(update.k, len);
    const std::size_t begin = update.offsets[c], end = update.offsets[c + 1];
    const auto& chunk = update.chunks[c];
    const std::size_t stored = update.quant.passthrough() ? chunk.raw.size() : chunk.codes.size();
    if (end - begin != kc || stored != kc) throw DimensionError("serialize: inconsistent chunk metadata");
    if (kc == 0) continue;
    body.write(update.quant.passthrough() ? 0 : chunk.scale_half, 16);
    std::vector<std::uint32_t> idx(update.indices.begin() + static_cast<std::ptrdiff_t>(begin),
                                   update.indices.begin() + static_cast<std::ptrdiff_t>(end));
    encode_indices(IndexSet(len, std::move(idx)), codec, body);
    if (update.quant.passthrough()) {
      for (T v : chunk.raw) body.write(std::bit_cast<std::uint32_t>(static_cast<float>(v)), 32);
    } else {
      for (auto code : chunk.codes) {
        if (code >= update.quant.levels()) throw DimensionError("serialize: code exceeds value width");
        body.write(code, bits);
      }
    }
  }
  const auto& body_bytes = body.bytes();
  out.insert(out.end(), body_bytes.begin(), body_bytes.end());
  return out;
}

SparseMessage deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kWireHeaderBytes) throw FormatError("wire: message shorter than header");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) throw FormatError("wire: bad magic");
  SparseMessage msg;
  auto& h = msg.header;
  h.version = get_le<std::uint16_t>(bytes, 4);
  if (h.version != kWireVersion) throw FormatError("wire: unsupported version " + std::to_string(h.version));
  h.value_bits = bytes[6];
  check_bits(h.value_bits);
  if (bytes[7] > 1) throw FormatError("wire: unknown index codec " + std::to_string(bytes[7]));
  h.codec = static_cast<IndexCodec>(bytes[7]);
  if (bytes[8] > 1 || bytes[9] != 0 || bytes[10] != 0 || bytes[11] != 0) throw FormatError("wire: bad flags");
  h.dct = bytes[8] == 1;
  h.param_len = get_le<std::uint64_t>(bytes, 12);
  h.chunk_size = get_le<std::uint32_t>(bytes, 20);
  h.k = get_le<std::uint32_t>(bytes, 24);
  h.num_chunks = get_le<std::uint32_t>(bytes, 28);
  if (h.param_len == 0 || h.chunk_size == 0) throw FormatError("wire: zero length or chunk size");
  const auto layout = chunk_layout(h.param_len, h.chunk_size);
  if (layout.num_chunks != h.num_chunks) throw FormatError("wire: num_chunks inconsistent with param_len / C");
  if (h.k > h.chunk_size) throw FormatError("wire: k exceeds chunk size");
  const std::uint64_t expected = message_size_bytes(h.param_len, h.chunk_size, h.k, h.value_bits, h.codec);
  if (bytes.size() != expected) {
    throw FormatError("wire: length " + std::to_string(bytes.size()) + " does not match expected " +
                      std::to_string(expected));
  }

  BitReader in(bytes.subspan(kWireHeaderBytes));
  const unsigned bits = h.value_bits;
  msg.offsets.push_back(0);
  for (std::size_t c = 0; c < layout.num_chunks; ++c) {
    const std::size_t len = layout.chunk_len(c);
    const std::size_t kc = effective_k(h.k, len);
    if (kc > 0) {
      msg.scales.push_back(static_cast<std::uint16_t>(in.read(16)));
      const IndexSet set = decode_indices(in, len, kc, h.codec);
      msg.indices.insert(msg.indices.end(), set.indices().begin(), set.indices().end());
      for (std::size_t j = 0; j < kc; ++j) {
        if (bits == 32) {
          msg.raw.push_back(std::bit_cast<float>(static_cast<std::uint32_t>(in.read(32))));
        } else {
          msg.codes.push_back(static_cast<std::uint8_t>(in.read(bits)));
        }
      }
    } else {
      msg.scales.push_back(0);
    }
    msg.offsets.push_back(static_cast<std::uint32_t>(msg.indices.size()));
  }
  while (in.remaining() > 0) {
    if (in.read_bit()) throw FormatError("wire: nonzero padding");
  }
  return msg;
}

template <std::floating_point T>
CompressedUpdate<T> to_update(const SparseMessage& msg) {
  CompressedUpdate<T> update;
  const auto& h = msg.header;
  update.layout = chunk_layout(h.param_len, h.chunk_size);
  update.k = h.k;
  update.quant = QuantSpec{h.value_bits};
  update.dct = h.dct;
  update.offsets = msg.offsets;
  update.indices = msg.indices;
  update.chunks.resize(update.layout.num_chunks);
  for (std::size_t c = 0; c < update.layout.num_chunks; ++c) {
    auto& q = update.chunks[c];
    const std::size_t begin = msg.offsets[c], end = msg.offsets[c + 1];
    if (update.quant.passthrough()) {
      q.raw.assign(msg.raw.begin() + static_cast<std::ptrdiff_t>(begin), msg.raw.begin() + static_cast<std::ptrdiff_t>(end));
    } else {
      q.scale_half = msg.scales[c];
      q.codes.assign(msg.codes.begin() + static_cast<std::ptrdiff_t>(begin),
                     msg.codes.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  return update;
}

std::uint64_t message_size_bytes(std::uint64_t param_len, std::size_t chunk_size, std::size_t k, unsigned value_bits,
                                 IndexCodec codec) {
  check_bits(value_bits);
  const auto layout = chunk_layout(param_len, chunk_size);
  if (k > chunk_size) throw DimensionError("message_size_bytes: k exceeds chunk size");
  return kWireHeaderBytes + (body_bits(layout, k, value_bits, codec) + 7) / 8;
}

std::uint64_t dense_message_bytes(std::uint64_t param_len, unsigned value_bits) {
  return (param_len * value_bits + 7) / 8;
}

template std::vector<std::uint8_t> serialize<float>(const CompressedUpdate<float>&, IndexCodec);
template std::vector<std::uint8_t> serialize<double>(const CompressedUpdate<double>&, IndexCodec);
template CompressedUpdate<float> to_update<float>(const SparseMessage&);
template CompressedUpdate<double> to_update<double>(const SparseMessage&);

}  // namespace sparseloco
