// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <vector>

#include "sparseloco/compression.hpp"
#include "sparseloco/errors.hpp"
#include "sparseloco/half.hpp"
#include "sparseloco/rng.hpp"

namespace sparseloco {
namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  Rng rng(seed, 0);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

// Sort-based oracle: stable sort of positions by descending magnitude, so
// ties go to the lower index; then the first k positions, re-sorted.
std::vector<std::uint32_t> oracle_topk(std::span<const double> chunk, std::size_t k) {
  std::vector<std::uint32_t> order(chunk.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return std::abs(chunk[a]) > std::abs(chunk[b]); });
  order.resize(std::min(k, chunk.size()));
  std::sort(order.begin(), order.end());
  return order;
}

TEST(TopK, MatchesSortOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 50 + 37 * seed;
    auto v = gaussian(n, seed);
    // Inject exact ties.
    for (std::size_t i = 0; i + 3 < n; i += 7) v[i + 3] = -v[i];
    const std::size_t chunk = 16 + seed;
    const std::size_t k = 1 + seed % 9;
    const auto layout = chunk_layout(n, chunk);
    const auto sel = chunk_topk<double>(v, layout, k);
    ASSERT_EQ(sel.num_chunks(), layout.num_chunks);
    for (std::size_t c = 0; c < layout.num_chunks; ++c) {
      std::span<const double> part(v.data() + layout.chunk_begin(c), layout.chunk_len(c));
      const auto expect = oracle_topk(part, k);
      const auto got = sel.chunk_indices(c);
      ASSERT_EQ(std::vector<std::uint32_t>(got.begin(), got.end()), expect) << "seed " << seed << " chunk " << c;
      const auto vals = sel.chunk_values(c);
      for (std::size_t j = 0; j < expect.size(); ++j) EXPECT_EQ(vals[j], part[expect[j]]);
    }
  }
}

TEST(TopK, FullKKeepsEverything) {
  const auto v = gaussian(10, 1);
  const auto sel = chunk_topk<double>(v, chunk_layout(10, 4), 4);
  EXPECT_EQ(sel.indices.size(), 10u);
  EXPECT_EQ(sel.to_dense(), v);
  EXPECT_THROW(chunk_topk<double>(v, chunk_layout(10, 4), 5), DimensionError);
}

TEST(TopK, TiesFavourLowerIndex) {
  const std::vector<double> v{1.0, -1.0, 1.0, 0.5};
  const auto sel = chunk_topk<double>(v, chunk_layout(4, 4), 2);
  EXPECT_EQ(sel.indices, (std::vector<std::uint32_t>{0, 1}));
}

TEST(RandK, DistinctSortedAndUniform) {
  const std::size_t chunk = 10, k = 3, trials = 30000;
  std::vector<double> v(chunk, 1.0);
  std::vector<std::size_t> hits(chunk, 0);
  Rng rng(4, 0);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto sel = chunk_randk<double>(v, chunk_layout(chunk, chunk), k, rng);
    ASSERT_EQ(sel.indices.size(), k);
    ASSERT_TRUE(std::is_sorted(sel.indices.begin(), sel.indices.end()));
    ASSERT_EQ(std::set<std::uint32_t>(sel.indices.begin(), sel.indices.end()).size(), k);
    for (auto i : sel.indices) ++hits[i];
  }
  // Each index is chosen with probability k/C; chi-square, 9 dof, 0.999 quantile.
  const double expect = double(trials) * k / chunk;
  double chi2 = 0.0;
  for (auto h : hits) chi2 += (h - expect) * (h - expect) / expect;
  EXPECT_LT(chi2, 27.88);
}

TEST(RandK, SameStreamSameSelection) {
  const auto v = gaussian(100, 2);
  Rng a(7, 1), b(7, 1);
  EXPECT_EQ(chunk_randk<double>(v, chunk_layout(100, 16), 4, a).indices,
            chunk_randk<double>(v, chunk_layout(100, 16), 4, b).indices);
}

TEST(Dct, MatchesDirectFormula) {
  const auto v = gaussian(12, 3);
  const auto coeffs = dct_chunk<double>(v);
  const double n = 12.0;
  for (std::size_t k = 0; k < 12; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 12; ++i) sum += v[i] * std::cos(std::numbers::pi * (i + 0.5) * k / n);
    const double w = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    EXPECT_NEAR(coeffs[k], w * sum, 1e-12);
  }
}

TEST(Dct, InverseAndEnergy) {
  const auto v = gaussian(100, 4);
  const auto layout = chunk_layout(100, 16);
  const auto c = dct_blocks<double>(v, layout, false);
  const auto back = dct_blocks<double>(c, layout, true);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(back[i], v[i], 1e-12);
  double e1 = 0, e2 = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    e1 += v[i] * v[i];
    e2 += c[i] * c[i];
  }
  EXPECT_NEAR(e1, e2, 1e-10);
}

TEST(Quantize, DocumentedTwoBitExample) {
  const std::vector<double> v{-1.0, 0.9, 0.1, -0.2};
  const QuantSpec spec{2};
  const auto q = quantize<double>(v, spec);
  EXPECT_DOUBLE_EQ(q.scale(), 1.0);
  EXPECT_EQ(dequantize<double>(q, spec), (std::vector<double>{-0.75, 0.75, 0.25, -0.25}));
}

TEST(Quantize, OneBitIsSignTimesMeanMagnitude) {
  const std::vector<double> v{-1.0, 0.5, 0.25, -0.25};
  const QuantSpec spec{1};
  const auto q = quantize<double>(v, spec);
  EXPECT_DOUBLE_EQ(q.scale(), 0.5);
  EXPECT_EQ(dequantize<double>(q, spec), (std::vector<double>{-0.5, 0.5, 0.5, -0.5}));
}

TEST(Quantize, PassthroughIsIdentity) {
  const auto v = gaussian(33, 5);
  const QuantSpec spec{32};
  EXPECT_EQ(dequantize<double>(quantize<double>(v, spec), spec), v);
}

TEST(Quantize, ErrorBoundOnDenseScan) {
  for (unsigned b : {2u, 3u, 4u}) {
    const QuantSpec spec{b};
    for (double s : {1.0, 0.37, 3e-3}) {
      std::vector<double> v;
      for (int i = -2000; i <= 2000; ++i) v.push_back(s * i / 2000.0);
      const auto q = quantize<double>(v, spec);
      const double sq = q.scale();
      EXPECT_GE(sq, s);
      const auto d = dequantize<double>(q, spec);
      for (std::size_t i = 0; i < v.size(); ++i) {
        ASSERT_LE(std::abs(d[i] - v[i]), sq / double(1u << b) * (1.0 + 1e-12)) << "b=" << b << " v=" << v[i];
      }
    }
  }
}

TEST(Quantize, AllZeroChunk) {
  const std::vector<double> v(5, 0.0);
  for (unsigned b : {1u, 2u, 4u}) {
    const auto q = quantize<double>(v, QuantSpec{b});
    EXPECT_EQ(q.scale_half, 0);
    EXPECT_EQ(dequantize<double>(q, QuantSpec{b}), v);
  }
}

TEST(Quantize, RejectsUnsupportedBits) {
  EXPECT_THROW(validate(QuantSpec{5}), ConfigError);
  EXPECT_THROW(validate(QuantSpec{0}), ConfigError);
  EXPECT_TRUE(is_supported_bits(3));
}

TEST(Half, RoundTripAndCeil) {
  EXPECT_EQ(half_to_float(float_to_half(1.0f)), 1.0f);
  EXPECT_EQ(half_to_float(float_to_half(-2.5f)), -2.5f);
  EXPECT_EQ(half_to_float(float_to_half(1e6f)), 65504.0f);
  EXPECT_EQ(half_to_float(float_to_half(5.960464477539063e-08f)), 5.960464477539063e-08f);
  for (float x : {0.1f, 0.3333f, 1.0009f, 123.456f, 1e-6f}) {
    const float up = half_to_float(float_to_half_ceil(x));
    EXPECT_GE(up, x);
    EXPECT_LE(up - x, std::abs(x) * 1e-3f + 6e-8f);
  }
}

TEST(Compress, DecompressEqualsSelectedDequantizedValues) {
  const auto v = gaussian(1000, 6);
  CompressorSpec spec;
  spec.chunk_size = 64;
  spec.k = 4;
  spec.quant = QuantSpec{32};
  const auto u = compress<double>(v, spec, nullptr);
  EXPECT_EQ(u.selected(), 15u * 4 + 4);
  const auto dense = decompress<double>(u, spec.chunk_size);
  const auto sel = chunk_topk<double>(v, chunk_layout(1000, 64), 4);
  EXPECT_EQ(dense, sel.to_dense());
  std::vector<double> acc(1000, 1.0);
  accumulate<double>(u, spec.chunk_size, -2.0, acc);
  for (std::size_t i = 0; i < 1000; ++i) EXPECT_DOUBLE_EQ(acc[i], 1.0 - 2.0 * dense[i]);
}

TEST(Compress, GlobalSelectionKeepsDensity) {
  CompressorSpec spec;
  spec.chunk_size = 256;
  spec.k = 8;
  spec.chunking = false;
  EXPECT_EQ(selection_layout(1000, spec).num_chunks, 1u);
  EXPECT_EQ(selection_k(1000, spec), 31u);
  EXPECT_EQ(selection_k(10, spec), 1u);
}

TEST(Compress, DctRoundTripWithFullK) {
  const auto v = gaussian(100, 8);
  CompressorSpec spec;
  spec.chunk_size = 32;
  spec.k = 32;
  spec.quant = QuantSpec{32};
  spec.dct = true;
  const auto dense = decompress<double>(compress<double>(v, spec, nullptr), spec.chunk_size);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(dense[i], v[i], 1e-12);
}

TEST(Compress, RandomKNeedsRng) {
  const auto v = gaussian(10, 1);
  CompressorSpec spec;
  spec.selection = SelectionKind::randk;
  EXPECT_THROW(compress<double>(v, spec, nullptr), ConfigError);
}

}  // namespace
}  // namespace sparseloco
