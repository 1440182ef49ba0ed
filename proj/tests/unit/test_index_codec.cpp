// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "sparseloco/bigint.hpp"
#include "sparseloco/bitbuffer.hpp"
#include "sparseloco/errors.hpp"
#include "sparseloco/index_codec.hpp"
#include "sparseloco/rng.hpp"

namespace sparseloco {
namespace {

// Pascal's triangle in 128-bit integers, independent of BigUint.
unsigned __int128 binom128(unsigned n, unsigned k) {
  if (k > n) return 0;
  std::vector<unsigned __int128> row(n + 1, 0);
  row[0] = 1;
  for (unsigned i = 1; i <= n; ++i) {
    for (unsigned j = i; j > 0; --j) row[j] += row[j - 1];
  }
  return row[k];
}

BigUint from128(unsigned __int128 x) {
  BigUint hi(static_cast<std::uint64_t>(x >> 64));
  BigUint out(static_cast<std::uint64_t>(x));
  for (int i = 0; i < 64; ++i) {
    if (hi.bit(static_cast<std::size_t>(i))) out.set_bit(static_cast<std::size_t>(64 + i));
  }
  return out;
}

TEST(BigUint, BinomialMatchesPascal) {
  for (unsigned n = 0; n <= 120; n += 7) {
    for (unsigned k = 0; k <= n + 1; k += 3) EXPECT_EQ(binomial(n, k), from128(binom128(n, k))) << n << " " << k;
  }
}

TEST(BigUint, KnownLargeValue) {
  EXPECT_EQ(binomial(100, 50).to_decimal(), "100891344545564193334812497256");
  EXPECT_EQ(binomial(4096, 1).to_decimal(), "4096");
  EXPECT_EQ(binomial(4096, 4096).to_decimal(), "1");
}

TEST(BigUint, ArithmeticAndOrdering) {
  BigUint a(~0ull);
  a += BigUint(1);
  EXPECT_EQ(a.bit_length(), 65u);
  EXPECT_EQ(a.to_decimal(), "18446744073709551616");
  a.mul_small(1000);
  EXPECT_EQ(a.to_decimal(), "18446744073709551616000");
  EXPECT_EQ(a.div_small(7), 5u);  // 2^64 = 2 (mod 7)
  EXPECT_EQ(a.to_decimal(), "2635249153387078802285");
}

TEST(BigUint, DivSmallRemainder) {
  BigUint a = binomial(200, 100);
  BigUint b = a;
  const auto r = b.div_small(1'000'000'007ull);
  b.mul_small(1'000'000'007ull);
  b += BigUint(r);
  EXPECT_EQ(a, b);
  EXPECT_LT(BigUint(3), BigUint(4));
  EXPECT_GT(binomial(200, 100), binomial(200, 99));
}

TEST(BigUint, ExactDivisionVariants) {
  BigUint a = binomial(300, 150);
  BigUint b = a;
  b.mul_small(12345).divexact_small(12345);
  EXPECT_EQ(a, b);
  BigUint c = a;
  c.mul_divexact_small(6, 4);  // a is even, so a * 6 / 4 is exact
  BigUint d = a;
  d.mul_small(3);
  d.div_small(2);
  EXPECT_EQ(c, d);
  BigUint e = a;
  e -= binomial(300, 149);
  EXPECT_LT(e, a);
}

TEST(BitBuffer, MsbFirstLayout) {
  BitWriter w;
  w.write(0b101, 3);
  w.write_bit(true);
  w.write(0xABCD, 16);
  EXPECT_EQ(w.bit_len(), 20u);
  ASSERT_EQ(w.bytes().size(), 3u);
  EXPECT_EQ(w.bytes()[0], 0b1011'1010);
  EXPECT_EQ(w.bytes()[1], 0b1011'1100);
  EXPECT_EQ(w.bytes()[2], 0b1101'0000);
  BitReader r(w.bytes(), w.bit_len());
  EXPECT_EQ(r.read(3), 0b101u);
  EXPECT_TRUE(r.read_bit());
  EXPECT_EQ(r.read(16), 0xABCDu);
  EXPECT_EQ(r.remaining(), 0u);
  EXPECT_THROW(r.read(1), FormatError);
}

TEST(BitBuffer, SixtyFourBitFields) {
  BitWriter w;
  w.write(1, 1);
  w.write(0x0123456789ABCDEFull, 64);
  BitReader r(w.bytes());
  EXPECT_EQ(r.read(1), 1u);
  EXPECT_EQ(r.read(64), 0x0123456789ABCDEFull);
}

// Every k-subset of [0, C) for C <= 12: ranks are distinct, cover
// [0, binom(C, k)), follow lexicographic order and unrank back.
TEST(Enumerative, ExhaustiveSmallChunks) {
  for (unsigned c = 1; c <= 12; ++c) {
    for (unsigned k = 1; k <= c; ++k) {
      const auto total = static_cast<std::uint64_t>(binom128(c, k));
      std::set<std::uint64_t> seen;
      for (std::uint32_t mask = 0; mask < (1u << c); ++mask) {
        if (static_cast<unsigned>(__builtin_popcount(mask)) != k) continue;
        std::vector<std::uint32_t> idx;
        for (unsigned i = 0; i < c; ++i) {
          if (mask >> i & 1u) idx.push_back(i);
        }
        // Oracle rank: sum_j binom(i_j, j+1) in 128-bit arithmetic.
        unsigned __int128 expect = 0;
        for (std::size_t j = 0; j < idx.size(); ++j) expect += binom128(idx[j], static_cast<unsigned>(j + 1));
        const BigUint rank = subset_rank(idx);
        ASSERT_EQ(rank, from128(expect));
        ASSERT_LT(rank.low_u64(), total);
        seen.insert(rank.low_u64());
        ASSERT_EQ(subset_unrank(rank, c, k), idx);
        BitWriter w;
        encode_enumerative(IndexSet(c, idx), w);
        ASSERT_EQ(w.bit_len(), enumerative_width(c, k));
        BitReader r(w.bytes(), w.bit_len());
        ASSERT_EQ(decode_enumerative(r, c, k).indices(), idx);
      }
      EXPECT_EQ(seen.size(), total) << "C=" << c << " k=" << k;
    }
  }
}

TEST(Enumerative, WidthIsCeilLog2Binomial) {
  EXPECT_EQ(enumerative_width(4096, 1), 12u);
  EXPECT_EQ(enumerative_width(8, 8), 0u);
  EXPECT_EQ(enumerative_width(5, 2), 4u);   // binom = 10
  EXPECT_EQ(enumerative_width(16, 8), 14u); // binom = 12870
  const double lim = limit_bits_per_value(4096, 128);
  EXPECT_GE(bits_per_value(4096, 128, IndexCodec::enumerative), lim);
  EXPECT_LE(bits_per_value(4096, 128, IndexCodec::enumerative), lim + 1.0 / 128);
}

TEST(Enumerative, LargeRandomRoundTrip) {
  Rng rng(5, 0);
  for (int t = 0; t < 20; ++t) {
    const std::size_t c = 4096, k = 1 + rng.uniform_index(512);
    std::set<std::uint32_t> s;
    while (s.size() < k) s.insert(static_cast<std::uint32_t>(rng.uniform_index(c)));
    const std::vector<std::uint32_t> idx(s.begin(), s.end());
    BitWriter w;
    encode_enumerative(IndexSet(c, idx), w);
    BitReader r(w.bytes(), w.bit_len());
    EXPECT_EQ(decode_enumerative(r, c, k).indices(), idx);
  }
}

TEST(Naive, FixedWidth) {
  EXPECT_EQ(naive_index_width(4096), 12u);
  EXPECT_EQ(naive_index_width(4097), 13u);
  EXPECT_EQ(naive_index_width(1), 0u);
  EXPECT_DOUBLE_EQ(bits_per_value(4096, 32, IndexCodec::naive), 12.0);
  const std::vector<std::uint32_t> idx{0, 5, 4095};
  BitWriter w;
  encode_naive(IndexSet(4096, idx), w);
  EXPECT_EQ(w.bit_len(), 36u);
  BitReader r(w.bytes(), w.bit_len());
  EXPECT_EQ(decode_naive(r, 4096, 3).indices(), idx);
}

TEST(IndexSet, RejectsInvalid) {
  EXPECT_THROW(IndexSet(8, {3, 3}), DimensionError);
  EXPECT_THROW(IndexSet(8, {4, 2}), DimensionError);
  EXPECT_THROW(IndexSet(8, {8}), DimensionError);
}

TEST(Decode, NaiveOutOfOrderIsFormatError) {
  BitWriter w;
  w.write(5, 3);
  w.write(2, 3);
  BitReader r(w.bytes(), w.bit_len());
  EXPECT_THROW(decode_naive(r, 8, 2), FormatError);
}

TEST(Decode, RankOutOfRangeIsFormatError) {
  BitWriter w;
  w.write(15, 4);  // binom(5, 2) = 10 < 15
  BitReader r(w.bytes(), w.bit_len());
  EXPECT_THROW(decode_enumerative(r, 5, 2), FormatError);
}

TEST(Codec, Names) {
  EXPECT_EQ(index_codec_from_string("naive"), IndexCodec::naive);
  EXPECT_EQ(to_string(IndexCodec::enumerative), "enumerative");
  EXPECT_THROW(index_codec_from_string("huffman"), ConfigError);
}

}  // namespace
}  // namespace sparseloco
