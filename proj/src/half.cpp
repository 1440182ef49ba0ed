// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/half.hpp"

#include <cmath>
#include <cstring>

namespace sparseloco {

namespace {
constexpr std::uint16_t kMaxFiniteHalf = 0x7BFF;
}

float half_to_float(std::uint16_t h) noexcept {
  const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
  const std::uint32_t exp = (h >> 10) & 0x1Fu;
  const std::uint32_t mant = h & 0x3FFu;
  float magnitude;
  if (exp == 0) {
    magnitude = std::ldexp(static_cast<float>(mant), -24);
  } else if (exp == 31) {
    magnitude = mant == 0 ? INFINITY : NAN;
  } else {
    magnitude = std::ldexp(static_cast<float>(mant | 0x400u), static_cast<int>(exp) - 25);
  }
  std::uint32_t bits;
  std::memcpy(&bits, &magnitude, sizeof bits);
  bits |= sign;
  float out;
  std::memcpy(&out, &bits, sizeof out);
  return out;
}

std::uint16_t float_to_half(float value) noexcept {
  std::uint32_t bits;
  std::memcpy(&bits, &value, sizeof bits);
  const std::uint16_t sign = static_cast<std::uint16_t>((bits >> 16) & 0x8000u);
  const float a = std::fabs(value);
  if (std::isnan(a)) return static_cast<std::uint16_t>(sign | 0x7E00u);
  if (a >= 65520.0f) return static_cast<std::uint16_t>(sign | kMaxFiniteHalf);
  if (a < std::ldexp(1.0f, -14)) {
    // Subnormal range: quantum 2^-24. nearbyint uses round-half-even.
    const auto q = static_cast<std::uint32_t>(std::nearbyint(std::ldexp(a, 24)));
    return static_cast<std::uint16_t>(sign | q);  // q == 1024 rolls into the smallest normal
  }
  int e;
  const float frac = std::frexp(a, &e);  // a = frac * 2^e, frac in [0.5, 1)
  // 11 significant bits -> mantissa integer in [1024, 2048].
  auto m = static_cast<std::uint32_t>(std::nearbyint(std::ldexp(frac, 11)));
  int exp_field = e - 1 + 15;
  if (m == 2048) {
    m = 1024;
    ++exp_field;
  }
  if (exp_field >= 31) return static_cast<std::uint16_t>(sign | kMaxFiniteHalf);
  return static_cast<std::uint16_t>(sign | (static_cast<std::uint32_t>(exp_field) << 10) | (m - 1024));
}

std::uint16_t float_to_half_ceil(float value) noexcept {
  if (!(value > 0.0f)) return 0;
  std::uint16_t h = float_to_half(value);
  if (half_to_float(h) < value && h < kMaxFiniteHalf) ++h;
  return h;
}

}  // namespace sparseloco
