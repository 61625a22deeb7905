// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "traincast/types.hpp"

namespace traincast {

struct RankInfo {
  std::int64_t machine = 0;
  std::int64_t local_slot = 0;
  std::int64_t pp_stage = 0;
  std::int64_t tp_group = 0;
  std::int64_t tp_index = 0;
  std::int64_t dp_group = 0;
  std::int64_t dp_index = 0;
  std::int64_t ep_group = -1;  // -1 when ep == 1
  std::int64_t ep_index = 0;
};

/// Deterministic placement of the (stage, tp index, dp index) grid onto
/// machines: TP fastest, then DP, then PP, filling machines contiguously.
/// TP groups land on contiguous local slots, DP groups stay intra-machine
/// whenever t*d divides into the machine, and PP peers hold the same
/// (tp, dp) index in adjacent stages.
struct RankMapping {
  std::int64_t n = 0;
  std::int64_t p = 1, t = 1, d = 1, e = 1;
  std::int64_t gpus_per_machine = 1;
  std::vector<RankInfo> ranks;
  std::vector<std::vector<std::int64_t>> tp_groups;  // members in ring order
  std::vector<std::vector<std::int64_t>> dp_groups;
  std::vector<std::vector<std::int64_t>> ep_groups;  // e-sized slices of DP groups
  bool inter_machine_tp = false;  // set when any TP group spans machines
  bool inter_machine_dp = false;
  bool inter_machine_pp = false;
  bool inter_machine_ep = false;

  std::int64_t rank_of(std::int64_t stage, std::int64_t tp_index,
                       std::int64_t dp_index) const noexcept {
    return stage * t * d + dp_index * t + tp_index;
  }
  /// PP peer in the next (+1) or previous (-1) stage; -1 when out of range.
  std::int64_t pp_peer(std::int64_t rank, int direction) const noexcept {
    const std::int64_t peer = rank + direction * t * d;
    return (peer >= 0 && peer < n) ? peer : -1;
  }
  std::int64_t machine_of(std::int64_t rank) const noexcept {
    return rank / gpus_per_machine;
  }
};

struct MappingOptions {
  // Strict mode rejects TP groups that cannot stay inside one machine;
  // otherwise the mapping is produced with inter_machine_tp flagged and
  // bandwidth lookups switch to inter-node keys.
  bool strict = false;
};

RankMapping map_ranks(const ParallelismConfig& parallel, const PlatformSpec& platform,
                      const MappingOptions& options = {});

}  // namespace traincast
