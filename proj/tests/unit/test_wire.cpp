// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "sparseloco/compression.hpp"
#include "sparseloco/errors.hpp"
#include "sparseloco/index_codec.hpp"
#include "sparseloco/rng.hpp"
#include "sparseloco/wire.hpp"

namespace sparseloco {
namespace {

std::vector<double> gaussian(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

// Length from the documented layout, summed chunk by chunk.
std::uint64_t expected_length(std::uint64_t n, std::size_t c, std::size_t k, unsigned b, IndexCodec codec) {
  const auto layout = chunk_layout(n, c);
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < layout.num_chunks; ++i) {
    const std::size_t len = layout.chunk_len(i);
    const std::size_t kc = std::min(k, len);
    if (kc == 0) continue;
    bits += 16 + index_payload_bits(len, kc, codec) + kc * b;
  }
  return kWireHeaderBytes + (bits + 7) / 8;
}

TEST(Wire, HeaderLayout) {
  Rng rng(1, 0);
  const auto v = gaussian(1000, rng);
  CompressorSpec spec;
  spec.chunk_size = 256;
  spec.k = 8;
  spec.quant = QuantSpec{2};
  const auto bytes = serialize<double>(compress<double>(v, spec, nullptr), IndexCodec::enumerative);
  ASSERT_GE(bytes.size(), kWireHeaderBytes);
  EXPECT_EQ(std::memcmp(bytes.data(), "SLCM", 4), 0);
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], 2);
  EXPECT_EQ(bytes[7], 1);
  EXPECT_EQ(bytes[8], 0);
  std::uint64_t n = 0;
  std::memcpy(&n, bytes.data() + 12, 8);
  EXPECT_EQ(n, 1000u);
  std::uint32_t c = 0, k = 0, chunks = 0;
  std::memcpy(&c, bytes.data() + 20, 4);
  std::memcpy(&k, bytes.data() + 24, 4);
  std::memcpy(&chunks, bytes.data() + 28, 4);
  EXPECT_EQ(c, 256u);
  EXPECT_EQ(k, 8u);
  EXPECT_EQ(chunks, 4u);
}

TEST(Wire, SizeFormulaMatchesSerializedLengthFuzz) {
  Rng rng(2, 0);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.uniform_index(3000);
    const std::size_t c = 1 + rng.uniform_index(600);
    const std::size_t k = 1 + rng.uniform_index(c);
    const unsigned bits_choices[] = {1, 2, 3, 4, 32};
    const unsigned b = bits_choices[rng.uniform_index(5)];
    const auto codec = rng.uniform_index(2) ? IndexCodec::enumerative : IndexCodec::naive;
    CompressorSpec spec;
    spec.chunk_size = c;
    spec.k = k;
    spec.quant = QuantSpec{b};
    const auto v = gaussian(n, rng);
    const auto update = compress<double>(v, spec, nullptr);
    const auto bytes = serialize<double>(update, codec);
    ASSERT_EQ(bytes.size(), message_size_bytes(n, c, k, b, codec)) << "n=" << n << " C=" << c << " k=" << k;
    ASSERT_EQ(bytes.size(), expected_length(n, c, k, b, codec));
    const auto msg = deserialize(bytes);
    const auto back = to_update<double>(msg);
    ASSERT_EQ(back.indices, update.indices);
    ASSERT_EQ(back.offsets, update.offsets);
    const auto d1 = decompress<double>(update, c);
    const auto d2 = decompress<double>(back, c);
    for (std::size_t i = 0; i < n; ++i) {
      // 64-bit pass-through values are narrowed to binary32 on the wire.
      const double expect = b == 32 ? static_cast<double>(static_cast<float>(d1[i])) : d1[i];
      ASSERT_EQ(d2[i], expect);
    }
  }
}

TEST(Wire, FloatPassThroughIsBitExact) {
  Rng rng(3, 0);
  std::vector<float> v(500);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  CompressorSpec spec;
  spec.chunk_size = 64;
  spec.k = 64;
  spec.quant = QuantSpec{32};
  const auto update = compress<float>(v, spec, nullptr);
  const auto back = to_update<float>(deserialize(serialize<float>(update, IndexCodec::naive)));
  EXPECT_EQ(decompress<float>(back, 64), v);
}

TEST(Wire, DctFlagRoundTrips) {
  Rng rng(4, 0);
  const auto v = gaussian(300, rng);
  CompressorSpec spec;
  spec.chunk_size = 64;
  spec.k = 6;
  spec.dct = true;
  const auto update = compress<double>(v, spec, nullptr);
  const auto bytes = serialize<double>(update, IndexCodec::enumerative);
  EXPECT_EQ(bytes[8], 1);
  const auto back = to_update<double>(deserialize(bytes));
  EXPECT_TRUE(back.dct);
  EXPECT_EQ(decompress<double>(back, 64), decompress<double>(update, 64));
}

TEST(Wire, RejectsMalformedMessages) {
  Rng rng(5, 0);
  const auto v = gaussian(200, rng);
  CompressorSpec spec;
  spec.chunk_size = 64;
  spec.k = 4;
  const auto good = serialize<double>(compress<double>(v, spec, nullptr), IndexCodec::enumerative);
  EXPECT_NO_THROW(deserialize(good));

  auto bad = good;
  bad[0] = 'X';
  EXPECT_THROW(deserialize(bad), FormatError);
  bad = good;
  bad[4] = 2;
  EXPECT_THROW(deserialize(bad), FormatError);
  bad = good;
  bad[6] = 5;
  EXPECT_THROW(deserialize(bad), FormatError);
  bad = good;
  bad[7] = 9;
  EXPECT_THROW(deserialize(bad), FormatError);
  bad = good;
  bad.pop_back();
  EXPECT_THROW(deserialize(bad), FormatError);
  bad = good;
  bad.push_back(0);
  EXPECT_THROW(deserialize(bad), FormatError);
  EXPECT_THROW(deserialize(std::vector<std::uint8_t>(10, 0)), FormatError);
}

TEST(Wire, DenseBytes) {
  EXPECT_EQ(dense_message_bytes(10, 32), 40u);
  EXPECT_EQ(dense_message_bytes(10, 8), 10u);
  EXPECT_EQ(dense_message_bytes(3, 2), 1u);
}

}  // namespace
}  // namespace sparseloco
