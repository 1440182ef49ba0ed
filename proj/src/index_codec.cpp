// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/index_codec.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>

#include "sparseloco/errors.hpp"

namespace sparseloco {

namespace {

// Walks binom(n, m) through unit moves of n and m using exact multiplicative
// updates; the n < m region (value 0) is handled explicitly.
class BinomialWalker {
 public:
  BinomialWalker(std::uint64_t n, std::uint64_t m) : n_(n), m_(m), value_(binomial(n, m)) {}

  const BigUint& value() const noexcept { return value_; }
  std::uint64_t n() const noexcept { return n_; }

  void inc_n() {
    ++n_;
    if (m_ > n_) {
      value_ = BigUint{};
    } else if (m_ == n_) {
      value_ = BigUint(1);
    } else {
      value_.mul_divexact_small(n_, n_ - m_);
    }
  }
  void dec_n() {
    // binom(n-1, m) = binom(n, m) * (n - m) / n
    if (m_ >= n_) {
      value_ = BigUint{};
    } else {
      value_.mul_divexact_small(n_ - m_, n_);
    }
    --n_;
  }
  void inc_m() {
    // binom(n, m+1) = binom(n, m) * (n - m) / (m + 1)
    if (m_ + 1 > n_) {
      value_ = BigUint{};
    } else {
      value_.mul_divexact_small(n_ - m_, m_ + 1);
    }
    ++m_;
  }
  void dec_m() {
    // binom(n, m-1) = binom(n, m) * m / (n - m + 1)
    --m_;
    if (m_ > n_) {
      value_ = BigUint{};
    } else if (m_ == n_) {
      value_ = BigUint(1);
    } else {
      value_.mul_divexact_small(m_ + 1, n_ - m_);
    }
  }

 private:
  std::uint64_t n_;
  std::uint64_t m_;
  BigUint value_;
};

void write_big(const BigUint& value, std::size_t width, BitWriter& out) {
  for (std::size_t i = width; i-- > 0;) out.write_bit(value.bit(i));
}

BigUint read_big(BitReader& in, std::size_t width) {
  BigUint value;
  for (std::size_t i = width; i-- > 0;) {
    if (in.read_bit()) value.set_bit(i);
  }
  return value;
}

}  // namespace

IndexSet::IndexSet(std::size_t chunk_size, std::vector<std::uint32_t> indices)
    : chunk_size_(chunk_size), indices_(std::move(indices)) {
  if (chunk_size_ == 0) throw DimensionError("IndexSet: chunk size must be positive");
  for (std::size_t j = 0; j < indices_.size(); ++j) {
    if (indices_[j] >= chunk_size_) throw DimensionError("IndexSet: index outside chunk");
    if (j > 0 && indices_[j] <= indices_[j - 1]) throw DimensionError("IndexSet: indices not strictly increasing");
  }
}

std::string_view to_string(IndexCodec codec) noexcept {
  return codec == IndexCodec::naive ? "naive" : "enumerative";
}

IndexCodec index_codec_from_string(std::string_view name) {
  if (name == "naive") return IndexCodec::naive;
  if (name == "enumerative") return IndexCodec::enumerative;
  throw ConfigError("compression.index_codec", "unknown codec '" + std::string(name) + "'");
}

unsigned naive_index_width(std::size_t chunk_size) {
  if (chunk_size == 0) throw DimensionError("naive_index_width: chunk size must be positive");
  return static_cast<unsigned>(std::bit_width(chunk_size - 1));
}

std::size_t enumerative_width(std::size_t chunk_size, std::size_t k) {
  if (k > chunk_size) throw DimensionError("enumerative_width: k exceeds chunk size");
  static std::shared_mutex mu;
  static std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  const auto key = std::make_pair(chunk_size, k);
  {
    std::shared_lock lock(mu);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  BigUint count = binomial(chunk_size, k);
  count -= BigUint(1);
  const std::size_t width = count.bit_length();
  std::unique_lock lock(mu);
  memo.emplace(key, width);
  return width;
}

std::size_t index_payload_bits(std::size_t chunk_size, std::size_t k, IndexCodec codec) {
  if (codec == IndexCodec::naive) return k * naive_index_width(chunk_size);
  return enumerative_width(chunk_size, k);
}

BigUint subset_rank(std::span<const std::uint32_t> indices) {
  BigUint rank;
  if (indices.empty()) return rank;
  BinomialWalker walker(indices[0], 1);
  rank += walker.value();
  for (std::size_t j = 1; j < indices.size(); ++j) {
    walker.inc_m();
    while (walker.n() < indices[j]) walker.inc_n();
    rank += walker.value();
  }
  return rank;
}

std::vector<std::uint32_t> subset_unrank(BigUint rank, std::size_t chunk_size, std::size_t k) {
  if (k > chunk_size) throw DimensionError("subset_unrank: k exceeds chunk size");
  std::vector<std::uint32_t> indices(k);
  if (k == 0) {
    if (!rank.is_zero()) throw FormatError("subset_unrank: nonzero rank for empty set");
    return indices;
  }
  if (rank >= binomial(chunk_size, k)) throw FormatError("subset_unrank: rank out of range");
  BinomialWalker walker(chunk_size - 1, k);
  for (std::size_t m = k; m >= 1; --m) {
    while (walker.value() > rank) walker.dec_n();
    indices[m - 1] = static_cast<std::uint32_t>(walker.n());
    rank -= walker.value();
    if (m == 1) break;
    walker.dec_m();
    walker.dec_n();
  }
  return indices;
}

void encode_naive(const IndexSet& set, BitWriter& out) {
  const unsigned width = naive_index_width(set.chunk_size());
  for (auto i : set.indices()) out.write(i, width);
}

IndexSet decode_naive(BitReader& in, std::size_t chunk_size, std::size_t k) {
  const unsigned width = naive_index_width(chunk_size);
  std::vector<std::uint32_t> indices(k);
  for (auto& i : indices) i = static_cast<std::uint32_t>(in.read(width));
  try {
    return IndexSet(chunk_size, std::move(indices));
  } catch (const DimensionError& e) {
    throw FormatError(std::string("decode_naive: ") + e.what());
  }
}

void encode_enumerative(const IndexSet& set, BitWriter& out) {
  write_big(subset_rank(set.indices()), enumerative_width(set.chunk_size(), set.k()), out);
}

IndexSet decode_enumerative(BitReader& in, std::size_t chunk_size, std::size_t k) {
  BigUint rank = read_big(in, enumerative_width(chunk_size, k));
  return IndexSet(chunk_size, subset_unrank(std::move(rank), chunk_size, k));
}

void encode_indices(const IndexSet& set, IndexCodec codec, BitWriter& out) {
  if (codec == IndexCodec::naive) {
    encode_naive(set, out);
  } else {
    encode_enumerative(set, out);
  }
}

IndexSet decode_indices(BitReader& in, std::size_t chunk_size, std::size_t k, IndexCodec codec) {
  return codec == IndexCodec::naive ? decode_naive(in, chunk_size, k) : decode_enumerative(in, chunk_size, k);
}

double limit_bits_per_value(std::size_t chunk_size, std::size_t k) {
  if (k < 1 || k > chunk_size) throw DimensionError("limit_bits_per_value: need 1 <= k <= C");
  const double n = static_cast<double>(chunk_size);
  const double kk = static_cast<double>(k);
  const double log2_binom = (std::lgamma(n + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(n - kk + 1.0)) / std::log(2.0);
  return log2_binom / kk;
}

double bits_per_value(std::size_t chunk_size, std::size_t k, IndexCodec codec) {
  if (k < 1 || k > chunk_size) throw DimensionError("bits_per_value: need 1 <= k <= C");
  return static_cast<double>(index_payload_bits(chunk_size, k, codec)) / static_cast<double>(k);
}

}  // namespace sparseloco
