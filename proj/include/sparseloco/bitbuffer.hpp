// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sparseloco {

/// Append-only MSB-first bit sequence. Bits fill each byte from its most
/// significant bit; the final byte is zero-padded.
class BitWriter {
 public:
  /// Writes the low `width` bits of `value`, most significant first.
  void write(std::uint64_t value, unsigned width);
  void write_bit(bool bit);

  std::size_t bit_len() const noexcept { return bit_len_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  std::vector<std::uint8_t> take() && { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bit_len_ = 0;
};

/// Reader over an MSB-first bit sequence; throws FormatError on overrun.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_len);
  explicit BitReader(std::span<const std::uint8_t> bytes) : BitReader(bytes, bytes.size() * 8) {}

  std::uint64_t read(unsigned width);
  bool read_bit();
  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bit_len_ - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t bit_len_;
  std::size_t pos_ = 0;
};

}  // namespace sparseloco
