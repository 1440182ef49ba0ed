// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace sparseloco {

enum class Topology : std::uint8_t { ring_all_reduce, ring_all_gather, parameter_server };

std::string_view to_string(Topology topology) noexcept;
Topology topology_from_string(std::string_view name);

/// Per-worker outbound bytes for one synchronization:
///   ring all-reduce:  2 * dense * (R - 1) / R
///   ring all-gather:  (R - 1) * message   (naive all-gather)
///   parameter server: message (upload only)
std::uint64_t outbound_bytes_per_sync(Topology topology, std::uint64_t dense_bytes, std::uint64_t message_bytes,
                                      std::size_t replicas);

/// Parameter-server traffic for one worker and one sync.
struct ServerTraffic {
  std::uint64_t upload = 0;
  std::uint64_t download = 0;
  std::uint64_t total() const noexcept { return upload + download; }
};

/// Dense methods download the dense aggregate; sparse methods download the
/// aggregate restricted to the union of all workers' indices (`union_bytes`).
ServerTraffic parameter_server_traffic(std::uint64_t message_bytes, std::uint64_t download_bytes);

/// Expected per-chunk union size when R workers each pick k of C positions
/// independently and uniformly: C * (1 - (1 - k/C)^R), rounded up.
std::size_t expected_union_k(std::size_t chunk_size, std::size_t k, std::size_t replicas);

/// Synchronizations over a run: ceil(total_inner_steps / H).
std::uint64_t num_syncs(std::uint64_t total_inner_steps, std::uint64_t inner_steps_per_sync);

std::uint64_t total_volume(std::uint64_t bytes_per_sync, std::uint64_t syncs);

struct LossVolumePoint {
  double loss = 0.0;
  double volume = 0.0;
};

/// Indices of the non-dominated points (lower loss and lower volume are
/// better), in input order. Duplicates of a frontier point are all kept.
std::vector<std::size_t> pareto_frontier(std::span<const LossVolumePoint> points);

}  // namespace sparseloco
