// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sparseloco {

/// Minimal arbitrary-precision unsigned integer, just enough for exact
/// binomial-coefficient ranking: add/sub, multiply and exact division by a
/// machine word, comparison and bit access. Limbs are little-endian 64-bit.
class BigUint {
 public:
  BigUint() = default;
  explicit BigUint(std::uint64_t value);

  bool is_zero() const noexcept { return limbs_.empty(); }
  std::size_t bit_length() const noexcept;
  bool bit(std::size_t i) const noexcept;
  void set_bit(std::size_t i);

  BigUint& operator+=(const BigUint& rhs);
  /// Requires *this >= rhs.
  BigUint& operator-=(const BigUint& rhs);
  BigUint& mul_small(std::uint64_t factor);
  /// Divides in place; returns the remainder.
  std::uint64_t div_small(std::uint64_t divisor);
  /// Divides in place when `divisor` is known to divide the value exactly;
  /// the result is meaningless otherwise.
  BigUint& divexact_small(std::uint64_t divisor);
  /// value * factor / divisor in one pass; the quotient must be exact.
  BigUint& mul_divexact_small(std::uint64_t factor, std::uint64_t divisor);

  std::strong_ordering operator<=>(const BigUint& rhs) const noexcept;
  bool operator==(const BigUint& rhs) const noexcept = default;

  /// Lowest 64 bits.
  std::uint64_t low_u64() const noexcept { return limbs_.empty() ? 0 : limbs_[0]; }
  std::string to_decimal() const;

 private:
  void trim() noexcept;
  std::vector<std::uint64_t> limbs_;
};

/// Exact binomial coefficient C(n, k); zero when k > n.
BigUint binomial(std::uint64_t n, std::uint64_t k);

}  // namespace sparseloco
