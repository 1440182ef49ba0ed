// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/bigint.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace sparseloco {

using u128 = unsigned __int128;

BigUint::BigUint(std::uint64_t value) {
  if (value != 0) limbs_.push_back(value);
}

void BigUint::trim() noexcept {
  while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
}

std::size_t BigUint::bit_length() const noexcept {
  if (limbs_.empty()) return 0;
  return 64 * (limbs_.size() - 1) + static_cast<std::size_t>(std::bit_width(limbs_.back()));
}

bool BigUint::bit(std::size_t i) const noexcept {
  const std::size_t limb = i / 64;
  if (limb >= limbs_.size()) return false;
  return (limbs_[limb] >> (i % 64)) & 1u;
}

void BigUint::set_bit(std::size_t i) {
  const std::size_t limb = i / 64;
  if (limb >= limbs_.size()) limbs_.resize(limb + 1, 0);
  limbs_[limb] |= std::uint64_t{1} << (i % 64);
}

BigUint& BigUint::operator+=(const BigUint& rhs) {
  if (rhs.limbs_.size() > limbs_.size()) limbs_.resize(rhs.limbs_.size(), 0);
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < limbs_.size(); ++i) {
    const u128 sum = static_cast<u128>(limbs_[i]) + (i < rhs.limbs_.size() ? rhs.limbs_[i] : 0) + carry;
    limbs_[i] = static_cast<std::uint64_t>(sum);
    carry = static_cast<std::uint64_t>(sum >> 64);
    if (carry == 0 && i >= rhs.limbs_.size()) break;
  }
  if (carry) limbs_.push_back(carry);
  return *this;
}

BigUint& BigUint::operator-=(const BigUint& rhs) {
  if (*this < rhs) throw std::underflow_error("BigUint: negative result");
  std::uint64_t borrow = 0;
  for (std::size_t i = 0; i < limbs_.size(); ++i) {
    const std::uint64_t r = i < rhs.limbs_.size() ? rhs.limbs_[i] : 0;
    if (r == 0 && borrow == 0 && i >= rhs.limbs_.size()) break;
    const u128 sub = static_cast<u128>(r) + borrow;
    const std::uint64_t before = limbs_[i];
    limbs_[i] = static_cast<std::uint64_t>(static_cast<u128>(before) - sub);
    borrow = static_cast<u128>(before) < sub ? 1 : 0;
  }
  trim();
  return *this;
}

BigUint& BigUint::mul_small(std::uint64_t factor) {
  if (factor == 0) {
    limbs_.clear();
    return *this;
  }
  std::uint64_t carry = 0;
  for (auto& limb : limbs_) {
    const u128 p = static_cast<u128>(limb) * factor + carry;
    limb = static_cast<std::uint64_t>(p);
    carry = static_cast<std::uint64_t>(p >> 64);
  }
  if (carry) limbs_.push_back(carry);
  return *this;
}

std::uint64_t BigUint::div_small(std::uint64_t divisor) {
  if (divisor == 0) throw std::domain_error("BigUint: division by zero");
  u128 rem = 0;
  for (std::size_t i = limbs_.size(); i-- > 0;) {
    const u128 cur = (rem << 64) | limbs_[i];
    limbs_[i] = static_cast<std::uint64_t>(cur / divisor);
    rem = cur % divisor;
  }
  trim();
  return static_cast<std::uint64_t>(rem);
}

BigUint& BigUint::divexact_small(std::uint64_t divisor) {
  if (divisor == 0) throw std::domain_error("BigUint: division by zero");
  // Strip the power of two, then multiply by the inverse of the odd part
  // modulo 2^64, limb by limb from the bottom.
  const int tz = std::countr_zero(divisor);
  if (tz > 0) {
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
      const std::uint64_t next = i + 1 < limbs_.size() ? limbs_[i + 1] : 0;
      limbs_[i] = (limbs_[i] >> tz) | (next << (64 - tz));
    }
    divisor >>= tz;
  }
  std::uint64_t inv = divisor;  // correct to 3 bits for odd divisors
  for (int i = 0; i < 5; ++i) inv *= 2 - divisor * inv;
  std::uint64_t borrow = 0;
  for (auto& limb : limbs_) {
    const std::uint64_t x = limb - borrow;
    borrow = x > limb ? 1 : 0;
    const std::uint64_t q = x * inv;
    limb = q;
    borrow += static_cast<std::uint64_t>((static_cast<u128>(q) * divisor) >> 64);
  }
  trim();
  return *this;
}

BigUint& BigUint::mul_divexact_small(std::uint64_t factor, std::uint64_t divisor) {
  if (divisor == 0) throw std::domain_error("BigUint: division by zero");
  if (factor == 0 || limbs_.empty()) {
    limbs_.clear();
    return *this;
  }
  const int common = std::min(std::countr_zero(factor), std::countr_zero(divisor));
  factor >>= common;
  divisor >>= common;
  if ((divisor & 1u) == 0) {
    // factor is odd now, so the value itself carries the remaining twos.
    const int tz = std::countr_zero(divisor);
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
      const std::uint64_t next = i + 1 < limbs_.size() ? limbs_[i + 1] : 0;
      limbs_[i] = (limbs_[i] >> tz) | (next << (64 - tz));
    }
    divisor >>= tz;
  }
  std::uint64_t inv = divisor;
  for (int i = 0; i < 5; ++i) inv *= 2 - divisor * inv;
  std::uint64_t carry = 0;
  std::uint64_t borrow = 0;
  const auto step = [&](std::uint64_t& limb) {
    const u128 p = static_cast<u128>(limb) * factor + carry;
    const auto lo = static_cast<std::uint64_t>(p);
    carry = static_cast<std::uint64_t>(p >> 64);
    const std::uint64_t x = lo - borrow;
    borrow = x > lo ? 1 : 0;
    const std::uint64_t q = x * inv;
    limb = q;
    borrow += static_cast<std::uint64_t>((static_cast<u128>(q) * divisor) >> 64);
  };
  for (auto& limb : limbs_) step(limb);
  if (carry != 0) {
    limbs_.push_back(0);
    step(limbs_.back());
  }
  trim();
  return *this;
}

std::strong_ordering BigUint::operator<=>(const BigUint& rhs) const noexcept {
  if (limbs_.size() != rhs.limbs_.size()) return limbs_.size() <=> rhs.limbs_.size();
  for (std::size_t i = limbs_.size(); i-- > 0;) {
    if (limbs_[i] != rhs.limbs_[i]) return limbs_[i] <=> rhs.limbs_[i];
  }
  return std::strong_ordering::equal;
}

std::string BigUint::to_decimal() const {
  if (is_zero()) return "0";
  BigUint tmp = *this;
  std::string digits;
  while (!tmp.is_zero()) digits.push_back(static_cast<char>('0' + tmp.div_small(10)));
  std::reverse(digits.begin(), digits.end());
  return digits;
}

BigUint binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return BigUint{};
  k = std::min(k, n - k);
  BigUint result(1);
  // C(n, j) = C(n, j-1) * (n - j + 1) / j, exact at every step.
  for (std::uint64_t j = 1; j <= k; ++j) {
    result.mul_divexact_small(n - j + 1, j);
  }
  return result;
}

}  // namespace sparseloco
