// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/compression.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

#include "sparseloco/errors.hpp"
#include "sparseloco/half.hpp"

namespace sparseloco {

namespace {

void check_k(std::size_t k, const ChunkLayout& layout, std::size_t len) {
  if (len != layout.length) throw DimensionError("selection: vector length does not match layout");
  if (k < 1 || k > layout.chunk_size) {
    throw DimensionError("selection: k=" + std::to_string(k) + " outside [1, " +
                         std::to_string(layout.chunk_size) + "]");
  }
}

template <typename T>
SelectionResult<T> start_selection(const ChunkLayout& layout, std::size_t k) {
  SelectionResult<T> sel;
  sel.layout = layout;
  sel.k = k;
  sel.offsets.reserve(layout.num_chunks + 1);
  sel.offsets.push_back(0);
  std::size_t total = 0;
  for (std::size_t c = 0; c < layout.num_chunks; ++c) total += effective_k(k, layout.chunk_len(c));
  sel.indices.reserve(total);
  sel.values.reserve(total);
  return sel;
}

// cos(pi * j / (2n)) for j in [0, 4n): DCT angles (2i+1)k pi / 2n reduce mod 4n.
const std::vector<double>& angle_table(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<const std::vector<double>>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) {
    auto table = std::make_unique<std::vector<double>>(4 * n);
    for (std::size_t j = 0; j < 4 * n; ++j) {
      (*table)[j] = std::cos(std::numbers::pi * static_cast<double>(j) / (2.0 * static_cast<double>(n)));
    }
    slot = std::move(table);
  }
  return *slot;
}

}  // namespace

template <std::floating_point T>
std::vector<T> SelectionResult<T>::to_dense() const {
  std::vector<T> dense(layout.length, T{0});
  for (std::size_t c = 0; c < layout.num_chunks; ++c) {
    const std::size_t base = layout.chunk_begin(c);
    for (std::size_t j = offsets[c]; j < offsets[c + 1]; ++j) dense[base + indices[j]] = values[j];
  }
  return dense;
}

template <std::floating_point T>
SelectionResult<T> chunk_topk(std::span<const T> v, const ChunkLayout& layout, std::size_t k) {
  check_k(k, layout, v.size());
  auto sel = start_selection<T>(layout, k);
  std::vector<std::uint32_t> order;
  for (std::size_t c = 0; c < layout.num_chunks; ++c) {
    const std::size_t len = layout.chunk_len(c);
    const std::size_t kc = effective_k(k, len);
    const T* chunk = v.data() + layout.chunk_begin(c);
    order.resize(len);
    std::iota(order.begin(), order.end(), 0u);
    auto before = [chunk](std::uint32_t a, std::uint32_t b) {
      const T ma = std::abs(chunk[a]);
      const T mb = std::abs(chunk[b]);
      return ma > mb || (ma == mb && a < b);
    };
    if (kc < len) std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kc), order.end(), before);
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kc));
    for (std::size_t j = 0; j < kc; ++j) {
      sel.indices.push_back(order[j]);
      sel.values.push_back(chunk[order[j]]);
    }
    sel.offsets.push_back(static_cast<std::uint32_t>(sel.indices.size()));
  }
  return sel;
}

template <std::floating_point T>
SelectionResult<T> chunk_randk(std::span<const T> v, const ChunkLayout& layout, std::size_t k, Rng& rng) {
  check_k(k, layout, v.size());
  auto sel = start_selection<T>(layout, k);
  std::vector<std::uint32_t> pool;
  for (std::size_t c = 0; c < layout.num_chunks; ++c) {
    const std::size_t len = layout.chunk_len(c);
    const std::size_t kc = effective_k(k, len);
    const T* chunk = v.data() + layout.chunk_begin(c);
    pool.resize(len);
    std::iota(pool.begin(), pool.end(), 0u);
    // Partial Fisher-Yates: the first kc slots become a uniform kc-subset.
    for (std::size_t j = 0; j < kc && kc < len; ++j) {
      const std::size_t pick = j + static_cast<std::size_t>(rng.uniform_index(len - j));
      std::swap(pool[j], pool[pick]);
    }
    std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(kc));
    for (std::size_t j = 0; j < kc; ++j) {
      sel.indices.push_back(pool[j]);
      sel.values.push_back(chunk[pool[j]]);
    }
    sel.offsets.push_back(static_cast<std::uint32_t>(sel.indices.size()));
  }
  return sel;
}

template <std::floating_point T>
std::vector<T> dct_chunk(std::span<const T> x) {
  const std::size_t n = x.size();
  if (n == 0) throw DimensionError("dct_chunk: empty chunk");
  const auto& table = angle_table(n);
  const std::size_t period = 4 * n;
  const double s0 = std::sqrt(1.0 / static_cast<double>(n));
  const double sk = std::sqrt(2.0 / static_cast<double>(n));
  std::vector<T> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    std::size_t j = k % period;  // angle index for i = 0: (2*0+1)*k
    const std::size_t step = (2 * k) % period;
    for (std::size_t i = 0; i < n; ++i) {
      acc += static_cast<double>(x[i]) * table[j];
      j += step;
      if (j >= period) j -= period;
    }
    out[k] = static_cast<T>(acc * (k == 0 ? s0 : sk));
  }
  return out;
}

template <std::floating_point T>
std::vector<T> dct_inverse(std::span<const T> coeffs) {
  const std::size_t n = coeffs.size();
  if (n == 0) throw DimensionError("dct_inverse: empty chunk");
  const auto& table = angle_table(n);
  const std::size_t period = 4 * n;
  const double s0 = std::sqrt(1.0 / static_cast<double>(n));
  const double sk = std::sqrt(2.0 / static_cast<double>(n));
  std::vector<double> acc(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double ck = static_cast<double>(coeffs[k]) * (k == 0 ? s0 : sk);
    if (ck == 0.0) continue;
    std::size_t j = k % period;
    const std::size_t step = (2 * k) % period;
    for (std::size_t i = 0; i < n; ++i) {
      acc[i] += ck * table[j];
      j += step;
      if (j >= period) j -= period;
    }
  }
  return std::vector<T>(acc.begin(), acc.end());
}

template <std::floating_point T>
std::vector<T> dct_blocks(std::span<const T> v, const ChunkLayout& layout, bool inverse) {
  if (v.size() != layout.length) throw DimensionError("dct_blocks: length mismatch");
  std::vector<T> out(v.size());
  for (std::size_t c = 0; c < layout.num_chunks; ++c) {
    const auto block = v.subspan(layout.chunk_begin(c), layout.chunk_len(c));
    const auto t = inverse ? dct_inverse<T>(block) : dct_chunk<T>(block);
    std::copy(t.begin(), t.end(), out.begin() + static_cast<std::ptrdiff_t>(layout.chunk_begin(c)));
  }
  return out;
}

bool is_supported_bits(unsigned bits) noexcept {
  return bits == 1 || bits == 2 || bits == 3 || bits == 4 || bits == 32;
}

void validate(const QuantSpec& spec) {
  if (!is_supported_bits(spec.bits)) {
    throw ConfigError("compression.bits", "must be one of 1, 2, 3, 4, 32 (got " + std::to_string(spec.bits) + ")");
  }
}

template <std::floating_point T>
double QuantizedChunk<T>::scale() const noexcept {
  return static_cast<double>(half_to_float(scale_half));
}

template <std::floating_point T>
QuantizedChunk<T> quantize(std::span<const T> values, const QuantSpec& spec) {
  validate(spec);
  QuantizedChunk<T> q;
  if (spec.passthrough()) {
    q.raw.assign(values.begin(), values.end());
    return q;
  }
  q.codes.assign(values.size(), 0);
  if (spec.bits == 1) {
    double mean_abs = 0.0;
    for (T x : values) mean_abs += std::abs(static_cast<double>(x));
    if (!values.empty()) mean_abs /= static_cast<double>(values.size());
    if (mean_abs == 0.0) return q;
    q.scale_half = float_to_half(static_cast<float>(mean_abs));
    for (std::size_t i = 0; i < values.size(); ++i) q.codes[i] = values[i] >= T{0} ? 1 : 0;
    return q;
  }
  const double absmax = max_abs<T>(values);
  if (absmax == 0.0) return q;
  std::uint16_t h = float_to_half_ceil(static_cast<float>(absmax));
  if (static_cast<double>(half_to_float(h)) < absmax && h < 0x7BFF) ++h;
  q.scale_half = h;
  const double s = q.scale();
  const auto levels = static_cast<double>(spec.levels());
  const double width = 2.0 * s / levels;
  const auto max_code = static_cast<long>(spec.levels() - 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const long code = static_cast<long>(std::floor((static_cast<double>(values[i]) + s) / width));
    q.codes[i] = static_cast<std::uint8_t>(std::clamp(code, 0L, max_code));
  }
  return q;
}

template <std::floating_point T>
std::vector<T> dequantize(const QuantizedChunk<T>& q, const QuantSpec& spec) {
  validate(spec);
  if (spec.passthrough()) return q.raw;
  std::vector<T> out(q.codes.size());
  const double s = q.scale();
  for (auto c : q.codes) {
    if (c >= spec.levels()) throw FormatError("dequantize: code " + std::to_string(c) + " invalid for " +
                                              std::to_string(spec.bits) + " bits");
  }
  if (s == 0.0) return std::vector<T>(q.codes.size(), T{0});
  if (spec.bits == 1) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(q.codes[i] ? s : -s);
    return out;
  }
  const double width = 2.0 * s / static_cast<double>(spec.levels());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<T>(-s + (static_cast<double>(q.codes[i]) + 0.5) * width);
  }
  return out;
}

ChunkLayout selection_layout(std::size_t len, const CompressorSpec& spec) {
  return chunk_layout(len, spec.chunking ? spec.chunk_size : len);
}

std::size_t selection_k(std::size_t len, const CompressorSpec& spec) {
  if (spec.chunking) return spec.k;
  // Without chunking the whole vector is one selection at the same density.
  return std::clamp<std::size_t>((spec.k * len + spec.chunk_size / 2) / spec.chunk_size, 1, len);
}

template <std::floating_point T>
CompressedUpdate<T> quantize_selection(const SelectionResult<T>& sel, const QuantSpec& quant, bool dct) {
  CompressedUpdate<T> update;
  update.layout = sel.layout;
  update.k = sel.k;
  update.quant = quant;
  update.dct = dct;
  update.offsets = sel.offsets;
  update.indices = sel.indices;
  update.chunks.reserve(sel.num_chunks());
  for (std::size_t c = 0; c < sel.num_chunks(); ++c) update.chunks.push_back(quantize<T>(sel.chunk_values(c), quant));
  return update;
}

template <std::floating_point T>
CompressedUpdate<T> compress(std::span<const T> v, const CompressorSpec& spec, Rng* rng) {
  validate(spec.quant);
  const ChunkLayout sel_layout = selection_layout(v.size(), spec);
  const std::size_t k = selection_k(v.size(), spec);
  std::vector<T> transformed;
  std::span<const T> source = v;
  if (spec.dct) {
    transformed = dct_blocks<T>(v, chunk_layout(v.size(), spec.chunk_size), false);
    source = transformed;
  }
  SelectionResult<T> sel;
  if (spec.selection == SelectionKind::randk) {
    if (rng == nullptr) throw ConfigError("compression.selection", "random-k needs an rng stream");
    sel = chunk_randk<T>(source, sel_layout, k, *rng);
  } else {
    sel = chunk_topk<T>(source, sel_layout, k);
  }
  return quantize_selection<T>(sel, spec.quant, spec.dct);
}

template <std::floating_point T>
std::vector<T> decompress(const CompressedUpdate<T>& update, std::size_t dct_block) {
  std::vector<T> dense(update.layout.length, T{0});
  for (std::size_t c = 0; c < update.layout.num_chunks; ++c) {
    const auto values = dequantize<T>(update.chunks[c], update.quant);
    const std::size_t base = update.layout.chunk_begin(c);
    for (std::size_t j = 0; j < values.size(); ++j) dense[base + update.indices[update.offsets[c] + j]] = values[j];
  }
  if (update.dct) return dct_blocks<T>(dense, chunk_layout(dense.size(), dct_block), true);
  return dense;
}

template <std::floating_point T>
void accumulate(const CompressedUpdate<T>& update, std::size_t dct_block, T scale, std::span<T> out) {
  if (out.size() != update.layout.length) throw DimensionError("accumulate: length mismatch");
  if (update.dct) {
    const auto dense = decompress<T>(update, dct_block);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * dense[i];
    return;
  }
  for (std::size_t c = 0; c < update.layout.num_chunks; ++c) {
    const auto values = dequantize<T>(update.chunks[c], update.quant);
    const std::size_t base = update.layout.chunk_begin(c);
    for (std::size_t j = 0; j < values.size(); ++j) out[base + update.indices[update.offsets[c] + j]] += scale * values[j];
  }
}

#define SPARSELOCO_INSTANTIATE(T)                                                                           \
  template struct SelectionResult<T>;                                                                       \
  template struct QuantizedChunk<T>;                                                                        \
  template SelectionResult<T> chunk_topk<T>(std::span<const T>, const ChunkLayout&, std::size_t);           \
  template SelectionResult<T> chunk_randk<T>(std::span<const T>, const ChunkLayout&, std::size_t, Rng&);    \
  template std::vector<T> dct_chunk<T>(std::span<const T>);                                                 \
  template std::vector<T> dct_inverse<T>(std::span<const T>);                                               \
  template std::vector<T> dct_blocks<T>(std::span<const T>, const ChunkLayout&, bool);                      \
  template QuantizedChunk<T> quantize<T>(std::span<const T>, const QuantSpec&);                             \
  template std::vector<T> dequantize<T>(const QuantizedChunk<T>&, const QuantSpec&);                        \
  template CompressedUpdate<T> quantize_selection<T>(const SelectionResult<T>&, const QuantSpec&, bool);    \
  template CompressedUpdate<T> compress<T>(std::span<const T>, const CompressorSpec&, Rng*);                \
  template std::vector<T> decompress<T>(const CompressedUpdate<T>&, std::size_t);                           \
  template void accumulate<T>(const CompressedUpdate<T>&, std::size_t, T, std::span<T>);

SPARSELOCO_INSTANTIATE(float)
SPARSELOCO_INSTANTIATE(double)

#undef SPARSELOCO_INSTANTIATE

}  // namespace sparseloco
