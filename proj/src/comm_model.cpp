// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sparseloco/comm_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sparseloco/errors.hpp"

namespace sparseloco {

std::string_view to_string(Topology topology) noexcept {
  switch (topology) {
    case Topology::ring_all_reduce: return "ring-all-reduce";
    case Topology::ring_all_gather: return "ring-all-gather";
    case Topology::parameter_server: return "parameter-server";
  }
  return "unknown";
}

Topology topology_from_string(std::string_view name) {
  if (name == "ring-all-reduce") return Topology::ring_all_reduce;
  if (name == "ring-all-gather") return Topology::ring_all_gather;
  if (name == "parameter-server") return Topology::parameter_server;
  throw ConfigError("topology", "unknown topology '" + std::string(name) + "'");
}

std::uint64_t outbound_bytes_per_sync(Topology topology, std::uint64_t dense_bytes, std::uint64_t message_bytes,
                                      std::size_t replicas) {
  if (replicas == 0) throw ConfigError("replicas", "must be positive");
  switch (topology) {
    case Topology::ring_all_reduce:
      if (replicas < 2) throw ConfigError("replicas", "ring topologies need at least 2 workers");
      // Rounded to the nearest byte.
      return (2 * dense_bytes * (replicas - 1) + replicas / 2) / replicas;
    case Topology::ring_all_gather:
      if (replicas < 2) throw ConfigError("replicas", "ring topologies need at least 2 workers");
      return (replicas - 1) * message_bytes;
    case Topology::parameter_server:
      return message_bytes;
  }
  return 0;
}

ServerTraffic parameter_server_traffic(std::uint64_t message_bytes, std::uint64_t download_bytes) {
  return {message_bytes, download_bytes};
}

std::size_t expected_union_k(std::size_t chunk_size, std::size_t k, std::size_t replicas) {
  if (k > chunk_size) throw DimensionError("expected_union_k: k exceeds chunk size");
  const double c = static_cast<double>(chunk_size);
  const double miss = std::pow(1.0 - static_cast<double>(k) / c, static_cast<double>(replicas));
  const auto u = static_cast<std::size_t>(std::ceil(c * (1.0 - miss) - 1e-9));
  return std::clamp(u, k, chunk_size);
}

std::uint64_t num_syncs(std::uint64_t total_inner_steps, std::uint64_t inner_steps_per_sync) {
  if (inner_steps_per_sync == 0) throw ConfigError("inner_steps", "must be positive");
  return (total_inner_steps + inner_steps_per_sync - 1) / inner_steps_per_sync;
}

std::uint64_t total_volume(std::uint64_t bytes_per_sync, std::uint64_t syncs) { return bytes_per_sync * syncs; }

std::vector<std::size_t> pareto_frontier(std::span<const LossVolumePoint> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].volume != points[b].volume) return points[a].volume < points[b].volume;
    return points[a].loss < points[b].loss;
  });
  // Sweep by increasing volume; a point survives if its loss beats every
  // strictly cheaper point and it is not beaten by an equal-volume point.
  std::vector<std::size_t> keep;
  double best_loss = INFINITY;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    const double vol = points[order[i]].volume;
    const double group_best = points[order[i]].loss;
    while (j < order.size() && points[order[j]].volume == vol) ++j;
    if (group_best < best_loss) {
      for (std::size_t g = i; g < j && points[order[g]].loss == group_best; ++g) keep.push_back(order[g]);
      best_loss = group_best;
    }
    i = j;
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

}  // namespace sparseloco
