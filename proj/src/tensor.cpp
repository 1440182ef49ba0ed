// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sparseloco {

namespace {

void require_same_len(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": length mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
  }
}

}  // namespace

template <std::floating_point T>
ParamVector<T>::ParamVector(std::size_t len) : values_(len, T{0}) {
  if (len == 0) throw DimensionError("ParamVector: length must be positive");
}

template <std::floating_point T>
ParamVector<T>::ParamVector(std::vector<T> values) : values_(std::move(values)) {
  if (values_.empty()) throw DimensionError("ParamVector: length must be positive");
  check_finite<T>(values_, "ParamVector");
}

template <std::floating_point T>
void ParamVector<T>::fill(T value) {
  std::fill(values_.begin(), values_.end(), value);
}

template <std::floating_point T>
bool ParamVector<T>::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](T v) { return std::isfinite(v); });
}

ChunkLayout chunk_layout(std::size_t len, std::size_t chunk_size) {
  if (len == 0) throw DimensionError("chunk_layout: length must be positive");
  if (chunk_size == 0) throw DimensionError("chunk_layout: chunk size must be positive");
  ChunkLayout layout;
  layout.length = len;
  layout.chunk_size = chunk_size;
  layout.num_chunks = (len + chunk_size - 1) / chunk_size;
  layout.tail_len = len - chunk_size * (layout.num_chunks - 1);
  return layout;
}

template <std::floating_point T>
ParamVector<T> axpy(T a, const ParamVector<T>& x, const ParamVector<T>& y) {
  require_same_len(x.size(), y.size(), "axpy");
  ParamVector<T> out = y;
  axpy_inplace<T>(a, x.span(), out.span());
  return out;
}

template <std::floating_point T>
void axpy_inplace(T a, std::span<const T> x, std::span<T> y) {
  require_same_len(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

template <std::floating_point T>
void scale_inplace(T a, std::span<T> x) noexcept {
  for (auto& v : x) v *= a;
}

template <std::floating_point T>
ParamVector<T> subtract(const ParamVector<T>& a, const ParamVector<T>& b) {
  require_same_len(a.size(), b.size(), "subtract");
  ParamVector<T> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

template <std::floating_point T>
double dot(std::span<const T> a, std::span<const T> b) {
  require_same_len(a.size(), b.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

template <std::floating_point T>
double norm2(std::span<const T> a) {
  return std::sqrt(dot<T>(a, a));
}

template <std::floating_point T>
double max_abs(std::span<const T> a) noexcept {
  double m = 0.0;
  for (T v : a) m = std::max(m, std::abs(static_cast<double>(v)));
  return m;
}

template <std::floating_point T>
double max_abs_diff(std::span<const T> a, std::span<const T> b) {
  require_same_len(a.size(), b.size(), "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return m;
}

template <std::floating_point T>
double cosine_similarity(std::span<const T> a, std::span<const T> b) {
  require_same_len(a.size(), b.size(), "cosine_similarity");
  const double na = norm2<T>(a);
  const double nb = norm2<T>(b);
  if (na == 0.0 && nb == 0.0) throw UndefinedSimilarity("cosine_similarity: both vectors are zero");
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot<T>(a, b) / (na * nb), -1.0, 1.0);
}

template <std::floating_point T>
void check_finite(std::span<const T> a, const char* what) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i])) {
      throw NumericError(std::string(what) + ": non-finite value at index " + std::to_string(i));
    }
  }
}

#define SPARSELOCO_INSTANTIATE(T)                                                     \
  template class ParamVector<T>;                                                     \
  template ParamVector<T> axpy<T>(T, const ParamVector<T>&, const ParamVector<T>&); \
  template void axpy_inplace<T>(T, std::span<const T>, std::span<T>);                \
  template void scale_inplace<T>(T, std::span<T>) noexcept;                          \
  template ParamVector<T> subtract<T>(const ParamVector<T>&, const ParamVector<T>&); \
  template double dot<T>(std::span<const T>, std::span<const T>);                    \
  template double norm2<T>(std::span<const T>);                                      \
  template double max_abs<T>(std::span<const T>) noexcept;                           \
  template double max_abs_diff<T>(std::span<const T>, std::span<const T>);           \
  template double cosine_similarity<T>(std::span<const T>, std::span<const T>);      \
  template void check_finite<T>(std::span<const T>, const char*);

SPARSELOCO_INSTANTIATE(float)
SPARSELOCO_INSTANTIATE(double)

#undef SPARSELOCO_INSTANTIATE

}  // namespace sparseloco
