// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "traincast/traffic.hpp"

namespace traincast {

/// Inputs for one pipeline-schedule simulation. Durations are seconds per
/// micro-batch per stage-chunk pass; with chunks = v > 1 a full micro-batch
/// costs v * (fwd + bwd) of compute on its device.
struct SimInput {
  std::int64_t stages = 1;         // p
  std::int64_t micro_batches = 1;  // m
  std::int64_t chunks = 1;         // v
  double fwd = 1.0;
  double bwd = -1.0;               // < 0: backward_ratio * fwd
  double tp_fwd = 0.0;             // serialized TP time inside a forward pass
  double tp_bwd = 0.0;
  double pp_hop = 0.0;             // boundary transfer latency per hop
  // Attribution of the 8-FLOPs split: 2 forward vs 4 backward + 2 recompute.
  double backward_ratio = 3.0;

  double bwd_or_default() const { return bwd < 0.0 ? backward_ratio * fwd : bwd; }
};

struct SimTask {
  std::int64_t micro_batch = 0;
  std::int64_t stage = 0;
  std::int64_t chunk = 0;
  bool backward = false;
  double start = 0.0;
  double end = 0.0;
};

struct SimResult {
  double iteration_time = 0.0;  // completion of the last backward at stage 0
  /// Idle share of the first stage. For interleaved runs the idle is
  /// normalized against the single-chunk span (busy + v * idle) so the
  /// closed-form family's v-fold reduction holds; stage0_idle and
  /// iteration_time carry the raw schedule-level values.
  double bubble_ratio = 0.0;
  double stage0_idle = 0.0;
  double stage0_busy = 0.0;
  /// Serialized P2P occupancy per rank: m * 2 * v * pp_hop.
  double pp_time = 0.0;
  std::vector<std::vector<SimTask>> tasks_per_stage;
};

/// Event-driven 1F1B: stage j runs min(m, p-1-j) warmup forwards, then strict
/// one-forward-one-backward alternation; forwards wait for the upstream
/// forward plus one hop, backwards for the downstream backward plus one hop.
/// Deterministic; ties resolve lower stage first, then lower micro-batch.
SimResult simulate(const SimInput& input);

/// Chunked schedule: the first chunk wave is simulated exactly and the
/// remaining (v-1)*m chunk passes run back-to-back, which models the
/// interleaved ramp of (p-1) chunk passes. Reduces to simulate() at v = 1.
SimResult simulate_interleaved(const SimInput& input);

/// Chrome-trace-compatible event list (name, ts, dur, pid=stage, tid=chunk).
std::string chrome_trace_json(const SimResult& result, const std::string& provenance);

/// Per-rank On-Off view of a simulated stage: compute renders as off
/// segments, serialized TP as tp-burst segments.
Timeline sim_timeline(const SimResult& result, std::int64_t stage,
                      double tp_fwd, double tp_bwd);

}  // namespace traincast
