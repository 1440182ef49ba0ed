// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "sparseloco/errors.hpp"

namespace sparseloco {

/// Flat, non-empty vector of model parameters (or anything shaped like them:
/// pseudo-gradients, momenta, error-feedback buffers).
template <std::floating_point T>
class ParamVector {
 public:
  using value_type = T;

  explicit ParamVector(std::size_t len);
  explicit ParamVector(std::vector<T> values);
  ParamVector(std::initializer_list<T> values) : ParamVector(std::vector<T>(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  T& operator[](std::size_t i) noexcept { return values_[i]; }
  const T& operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<T> span() noexcept { return values_; }
  std::span<const T> span() const noexcept { return values_; }
  const std::vector<T>& values() const noexcept { return values_; }

  T* data() noexcept { return values_.data(); }
  const T* data() const noexcept { return values_.data(); }
  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  void fill(T value);
  bool all_finite() const noexcept;

  bool operator==(const ParamVector&) const = default;

 private:
  std::vector<T> values_;
};

/// Chunking of a flat vector into fixed-size chunks; the last chunk may be
/// partial.
struct ChunkLayout {
  std::size_t length = 0;
  std::size_t chunk_size = 0;
  std::size_t num_chunks = 0;
  std::size_t tail_len = 0;

  std::size_t chunk_begin(std::size_t c) const noexcept { return c * chunk_size; }
  std::size_t chunk_len(std::size_t c) const noexcept {
    return c + 1 == num_chunks ? tail_len : chunk_size;
  }
  bool operator==(const ChunkLayout&) const = default;
};

ChunkLayout chunk_layout(std::size_t len, std::size_t chunk_size);

template <std::floating_point T>
ParamVector<T> axpy(T a, const ParamVector<T>& x, const ParamVector<T>& y);

/// y += a * x
template <std::floating_point T>
void axpy_inplace(T a, std::span<const T> x, std::span<T> y);

template <std::floating_point T>
void scale_inplace(T a, std::span<T> x) noexcept;

/// Returns a - b.
template <std::floating_point T>
ParamVector<T> subtract(const ParamVector<T>& a, const ParamVector<T>& b);

// Reductions run strictly left to right with a double accumulator, so results
// do not depend on threading or vectorization.
template <std::floating_point T>
double dot(std::span<const T> a, std::span<const T> b);

template <std::floating_point T>
double norm2(std::span<const T> a);

template <std::floating_point T>
double max_abs(std::span<const T> a) noexcept;

template <std::floating_point T>
double max_abs_diff(std::span<const T> a, std::span<const T> b);

template <std::floating_point T>
double cosine_similarity(std::span<const T> a, std::span<const T> b);

template <std::floating_point T>
double cosine_similarity(const ParamVector<T>& a, const ParamVector<T>& b) {
  return cosine_similarity<T>(a.span(), b.span());
}

template <std::floating_point T>
void check_finite(std::span<const T> a, const char* what);

}  // namespace sparseloco
