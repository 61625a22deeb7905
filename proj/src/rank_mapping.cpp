// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#include "traincast/rank_mapping.hpp"

#include <string>

#include "traincast/errors.hpp"

namespace traincast {

RankMapping map_ranks(const ParallelismConfig& parallel, const PlatformSpec& platform,
                      const MappingOptions& options) {
  const std::int64_t p = parallel.pp, t = parallel.tp, d = parallel.dp;
  const std::int64_t n = p * t * d;
  if (n != platform.total_gpus()) {
    fail(Errc::GpuCountMismatch,
         "p*t*d = " + std::to_string(n) + " but platform has " +
             std::to_string(platform.total_gpus()) + " GPUs");
  }

  RankMapping map;
  map.n = n;
  map.p = p;
  map.t = t;
  map.d = d;
  map.e = parallel.ep;
  map.gpus_per_machine = platform.gpus_per_machine;
  map.ranks.resize(static_cast<std::size_t>(n));
  map.tp_groups.assign(static_cast<std::size_t>(n / t), {});
  map.dp_groups.assign(static_cast<std::size_t>(n / d), {});

  for (std::int64_t rank = 0; rank < n; ++rank) {
    RankInfo& info = map.ranks[static_cast<std::size_t>(rank)];
    info.machine = rank / platform.gpus_per_machine;
    info.local_slot = rank % platform.gpus_per_machine;
    info.tp_index = rank % t;
    info.dp_index = (rank / t) % d;
    info.pp_stage = rank / (t * d);
    info.tp_group = rank / t;
    info.dp_group = info.pp_stage * t + info.tp_index;
    map.tp_groups[static_cast<std::size_t>(info.tp_group)].push_back(rank);
  }
  // DP groups in dp_index order: same (stage, tp_index), stride t.
  for (std::int64_t stage = 0; stage < p; ++stage) {
    for (std::int64_t tp_index = 0; tp_index < t; ++tp_index) {
      auto& group = map.dp_groups[static_cast<std::size_t>(stage * t + tp_index)];
      for (std::int64_t dp_index = 0; dp_index < d; ++dp_index)
        group.push_back(map.rank_of(stage, tp_index, dp_index));
    }
  }
  // Expert groups are consecutive e-sized slices of each DP group; validate()
  // guarantees e divides d for MoE runs.
  if (map.e > 1 && d % map.e == 0) {
    for (const auto& group : map.dp_groups) {
      for (std::int64_t base = 0; base + map.e <= d; base += map.e) {
        std::vector<std::int64_t> ep_group(
            group.begin() + static_cast<std::ptrdiff_t>(base),
            group.begin() + static_cast<std::ptrdiff_t>(base + map.e));
        const std::int64_t ep_id = static_cast<std::int64_t>(map.ep_groups.size());
        for (std::int64_t i = 0; i < map.e; ++i) {
          RankInfo& info = map.ranks[static_cast<std::size_t>(ep_group[static_cast<std::size_t>(i)])];
          info.ep_group = ep_id;
          info.ep_index = i;
        }
        map.ep_groups.push_back(std::move(ep_group));
      }
    }
  }

  auto spans_machines = [&](const std::vector<std::int64_t>& group) {
    for (std::size_t i = 1; i < group.size(); ++i)
      if (map.machine_of(group[i]) != map.machine_of(group[0])) return true;
    return false;
  };
  for (const auto& group : map.tp_groups)
    if (spans_machines(group)) { map.inter_machine_tp = true; break; }
  for (const auto& group : map.dp_groups)
    if (spans_machines(group)) { map.inter_machine_dp = true; break; }
  for (const auto& group : map.ep_groups)
    if (spans_machines(group)) { map.inter_machine_ep = true; break; }
  for (std::int64_t rank = 0; rank < n - t * d; ++rank) {
    if (map.machine_of(rank) != map.machine_of(rank + t * d)) {
      map.inter_machine_pp = true;
      break;
    }
  }

  if (options.strict && map.inter_machine_tp) {
    fail(Errc::UnmappableTpGroup,
         "TP groups of size " + std::to_string(t) +
             " cannot stay inside machines of " +
             std::to_string(platform.gpus_per_machine) + " GPUs");
  }
  return map;
}

}  // namespace traincast
