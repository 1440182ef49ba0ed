// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/bitbuffer.hpp"

#include "sparseloco/errors.hpp"

namespace sparseloco {

void BitWriter::write_bit(bool bit) {
  if (bit_len_ % 8 == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bit_len_ % 8));
  ++bit_len_;
}

void BitWriter::write(std::uint64_t value, unsigned width) {
  if (width > 64) throw FormatError("BitWriter: width above 64");
  for (unsigned i = width; i-- > 0;) write_bit((value >> i) & 1u);
}

BitReader::BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_len) : bytes_(bytes), bit_len_(bit_len) {
  if (bit_len > bytes.size() * 8) throw FormatError("BitReader: bit length exceeds buffer");
}

bool BitReader::read_bit() {
  if (pos_ >= bit_len_) throw FormatError("BitReader: read past end of bit stream");
  const bool bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
  ++pos_;
  return bit;
}

std::uint64_t BitReader::read(unsigned width) {
  if (width > 64) throw FormatError("BitReader: width above 64");
  if (width > remaining()) throw FormatError("BitReader: read past end of bit stream");
  std::uint64_t value = 0;
  for (unsigned i = 0; i < width; ++i) value = (value << 1) | (read_bit() ? 1u : 0u);
  return value;
}

}  // namespace sparseloco
