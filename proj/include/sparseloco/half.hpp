// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace sparseloco {

// IEEE 754 binary16 helpers used for per-chunk scales on the wire.

/// Round-to-nearest-even conversion; overflow saturates to the largest finite
/// half (65504).
std::uint16_t float_to_half(float value) noexcept;

/// Smallest half >= value for value >= 0 (saturating at 65504).
std::uint16_t float_to_half_ceil(float value) noexcept;

float half_to_float(std::uint16_t bits) noexcept;

}  // namespace sparseloco
