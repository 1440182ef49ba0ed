// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "sparseloco/errors.hpp"
#include "sparseloco/rng.hpp"
#include "sparseloco/tensor.hpp"

namespace sparseloco {
namespace {

TEST(ChunkLayout, PartialTail) {
  const auto l = chunk_layout(10, 4);
  EXPECT_EQ(l.num_chunks, 3u);
  EXPECT_EQ(l.tail_len, 2u);
  EXPECT_EQ(l.chunk_len(0), 4u);
  EXPECT_EQ(l.chunk_len(2), 2u);
  EXPECT_EQ(l.chunk_begin(2), 8u);
}

TEST(ChunkLayout, ExactMultiple) {
  const auto l = chunk_layout(8, 4);
  EXPECT_EQ(l.num_chunks, 2u);
  EXPECT_EQ(l.tail_len, 4u);
}

TEST(ChunkLayout, RejectsZero) {
  EXPECT_THROW(chunk_layout(0, 4), DimensionError);
  EXPECT_THROW(chunk_layout(4, 0), DimensionError);
}

TEST(ParamVector, Arithmetic) {
  ParamVector<double> a{1.0, 2.0, 3.0};
  ParamVector<double> b{0.5, -1.0, 2.0};
  EXPECT_EQ(subtract(a, b), (ParamVector<double>{0.5, 3.0, 1.0}));
  EXPECT_EQ(axpy(2.0, a, b), (ParamVector<double>{2.5, 3.0, 8.0}));
  EXPECT_DOUBLE_EQ(dot<double>(a.span(), b.span()), 4.5);
  EXPECT_DOUBLE_EQ(norm2<double>(a.span()), std::sqrt(14.0));
  EXPECT_DOUBLE_EQ(max_abs<double>(b.span()), 2.0);
  EXPECT_DOUBLE_EQ(max_abs_diff<double>(a.span(), b.span()), 3.0);
}

TEST(ParamVector, LengthMismatchThrows) {
  ParamVector<float> a(3), b(4);
  EXPECT_THROW(subtract(a, b), DimensionError);
  EXPECT_THROW(dot<float>(a.span(), b.span()), DimensionError);
}

TEST(Cosine, KnownValues) {
  ParamVector<double> a{1.0, 0.0}, b{1.0, 1.0}, z{0.0, 0.0};
  EXPECT_NEAR(cosine_similarity(a, b), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-15);
  EXPECT_THROW(cosine_similarity(z, z), UndefinedSimilarity);
}

TEST(CheckFinite, FlagsNan) {
  EXPECT_THROW((ParamVector<float>{1.0f, std::nanf("")}), NumericError);
  ParamVector<float> a(2);
  a[1] = std::nanf("");
  EXPECT_FALSE(a.all_finite());
  EXPECT_THROW(check_finite<float>(a.span(), "x"), NumericError);
}

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  EXPECT_EQ(Rng::philox(A4{0, 0, 0, 0}, A2{0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Rng::philox(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Rng::philox(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  std::vector<std::uint64_t> va, vb, vc, vd;
  for (int i = 0; i < 16; ++i) {
    va.push_back(a.next_u64());
    vb.push_back(b.next_u64());
    vc.push_back(c.next_u64());
    vd.push_back(d.next_u64());
  }
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
  EXPECT_NE(va, vd);
}

TEST(Rng, UniformMoments) {
  Rng rng(1, 0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(Rng, NormalMoments) {
  Rng rng(2, 0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, UniformIndexCoversRangeEvenly) {
  Rng rng(3, 0);
  std::vector<int> hist(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto v = rng.uniform_index(7);
    ASSERT_LT(v, 7u);
    ++hist[v];
  }
  // Chi-square with 6 degrees of freedom; 22.46 is the 0.999 quantile.
  double chi2 = 0.0;
  for (int h : hist) chi2 += (h - n / 7.0) * (h - n / 7.0) / (n / 7.0);
  EXPECT_LT(chi2, 22.46);
}

}  // namespace
}  // namespace sparseloco
