// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#include "traincast/schedule_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "traincast/errors.hpp"

namespace traincast {

namespace {

struct TaskRef {
  std::int64_t micro_batch;
  bool backward;
};

// Static 1F1B dispatch order for one stage: warmup forwards, then (F, B)
// pairs, then the backward drain.
std::vector<TaskRef> stage_order(std::int64_t p, std::int64_t m, std::int64_t stage) {
  std::vector<TaskRef> order;
  order.reserve(static_cast<std::size_t>(2 * m));
  const std::int64_t warmup = std::min(m, p - 1 - stage);
  for (std::int64_t i = 0; i < warmup; ++i) order.push_back({i, false});
  std::int64_t next_bwd = 0;
  for (std::int64_t i = warmup; i < m; ++i) {
    order.push_back({i, false});
    order.push_back({next_bwd++, true});
  }
  while (next_bwd < m) order.push_back({next_bwd++, true});
  return order;
}

void check_input(const SimInput& input) {
  if (input.stages < 1 || input.micro_batches < 1 || input.chunks < 1)
    fail(Errc::InvalidSpec, "simulation needs p, m, v >= 1");
  if (input.fwd < 0.0 || input.bwd_or_default() < 0.0 || input.tp_fwd < 0.0 ||
      input.tp_bwd < 0.0 || input.pp_hop < 0.0)
    fail(Errc::InvalidSpec, "simulation durations must be >= 0");
}

}  // namespace

SimResult simulate(const SimInput& input) {
  check_input(input);
  const std::int64_t p = input.stages;
  const std::int64_t m = input.micro_batches;
  const double fwd_dur = input.fwd + input.tp_fwd;
  const double bwd_dur = input.bwd_or_default() + input.tp_bwd;

  std::vector<std::vector<TaskRef>> orders;
  orders.reserve(static_cast<std::size_t>(p));
  for (std::int64_t j = 0; j < p; ++j) orders.push_back(stage_order(p, m, j));

  // end[mb][stage], forward and backward; NaN while unscheduled.
  const double unset = -1.0;
  auto idx = [m](std::int64_t mb, std::int64_t stage) {
    return static_cast<std::size_t>(stage * m + mb);
  };
  std::vector<double> fwd_end(static_cast<std::size_t>(p * m), unset);
  std::vector<double> bwd_end(static_cast<std::size_t>(p * m), unset);

  SimResult result;
  result.tasks_per_stage.assign(static_cast<std::size_t>(p), {});
  std::vector<std::size_t> head(static_cast<std::size_t>(p), 0);
  std::vector<double> cursor(static_cast<std::size_t>(p), 0.0);

  std::int64_t remaining = 2 * p * m;
  while (remaining > 0) {
    bool progressed = false;
    for (std::int64_t j = 0; j < p; ++j) {
      while (head[static_cast<std::size_t>(j)] < orders[static_cast<std::size_t>(j)].size()) {
        const TaskRef ref = orders[static_cast<std::size_t>(j)][head[static_cast<std::size_t>(j)]];
        double ready = 0.0;
        if (!ref.backward) {
          if (j > 0) {
            const double dep = fwd_end[idx(ref.micro_batch, j - 1)];
            if (dep == unset) break;
            ready = dep + input.pp_hop;
          }
        } else {
          if (j < p - 1) {
            const double dep = bwd_end[idx(ref.micro_batch, j + 1)];
            if (dep == unset) break;
            ready = dep + input.pp_hop;
          } else {
            const double dep = fwd_end[idx(ref.micro_batch, j)];
            if (dep == unset) break;
            ready = dep;
          }
        }
        const double start = std::max(cursor[static_cast<std::size_t>(j)], ready);
        const double dur = ref.backward ? bwd_dur : fwd_dur;
        const double end = start + dur;
        cursor[static_cast<std::size_t>(j)] = end;
        (ref.backward ? bwd_end : fwd_end)[idx(ref.micro_batch, j)] = end;
        result.tasks_per_stage[static_cast<std::size_t>(j)].push_back(
            {ref.micro_batch, j, 0, ref.backward, start, end});
        ++head[static_cast<std::size_t>(j)];
        --remaining;
        progressed = true;
      }
    }
    if (!progressed)
      fail(Errc::InvalidSpec, "pipeline schedule deadlocked");  // unreachable
  }

  result.iteration_time = bwd_end[idx(m - 1, 0)];
  result.stage0_busy = static_cast<double>(m) * (fwd_dur + bwd_dur);
  result.stage0_idle = result.iteration_time - result.stage0_busy;
  if (result.stage0_idle < 0.0) result.stage0_idle = 0.0;  // fp guard
  result.pp_time = static_cast<double>(m) * 2.0 * input.pp_hop;
  const double denom = result.stage0_busy + result.stage0_idle;
  result.bubble_ratio = denom > 0.0 ? result.stage0_idle / denom : 0.0;
  return result;
}

SimResult simulate_interleaved(const SimInput& input) {
  check_input(input);
  if (input.chunks == 1) return simulate(input);

  SimResult wave = simulate(SimInput{input.stages, input.micro_batches, 1,
                                     input.fwd, input.bwd_or_default(),
                                     input.tp_fwd, input.tp_bwd, input.pp_hop,
                                     input.backward_ratio});
  const double pass = input.fwd + input.tp_fwd + input.bwd_or_default() + input.tp_bwd;
  const double steady =
      static_cast<double>(input.chunks - 1) * static_cast<double>(input.micro_batches) * pass;

  SimResult result = std::move(wave);
  result.iteration_time += steady;
  result.stage0_busy += steady;
  result.pp_time = static_cast<double>(input.micro_batches) * 2.0 *
                   static_cast<double>(input.chunks) * input.pp_hop;
  const double denom =
      result.stage0_busy + static_cast<double>(input.chunks) * result.stage0_idle;
  result.bubble_ratio = denom > 0.0 ? result.stage0_idle / denom : 0.0;
  return result;
}

std::string chrome_trace_json(const SimResult& result, const std::string& provenance) {
  std::ostringstream out;
  out << "{\"provenance\":\"" << provenance << "\",\"displayTimeUnit\":\"ms\","
      << "\"traceEvents\":[";
  bool first = true;
  char buf[160];
  for (const auto& stage_tasks : result.tasks_per_stage) {
    for (const SimTask& task : stage_tasks) {
      std::snprintf(buf, sizeof(buf),
                    "%s{\"name\":\"%s%lld\",\"ph\":\"X\",\"ts\":%.6f,\"dur\":%.6f,"
                    "\"pid\":%lld,\"tid\":%lld}",
                    first ? "" : ",", task.backward ? "B" : "F",
                    static_cast<long long>(task.micro_batch), task.start * 1e6,
                    (task.end - task.start) * 1e6,
                    static_cast<long long>(task.stage),
                    static_cast<long long>(task.chunk));
      out << buf;
      first = false;
    }
  }
  out << "]}";
  return out.str();
}

Timeline sim_timeline(const SimResult& result, std::int64_t stage, double tp_fwd,
                      double tp_bwd) {
  if (stage < 0 || stage >= static_cast<std::int64_t>(result.tasks_per_stage.size()))
    fail(Errc::InvalidSpec, "stage out of range");
  Timeline timeline;
  const auto& tasks = result.tasks_per_stage[static_cast<std::size_t>(stage)];
  timeline.blocks = static_cast<std::int64_t>(tasks.size());
  double cursor = 0.0;
  for (const SimTask& task : tasks) {
    if (task.start > cursor)
      timeline.segments.push_back({cursor, task.start, TimelineKind::Off});
    const double tp = task.backward ? tp_bwd : tp_fwd;
    const double compute_end = task.end - tp;
    if (compute_end > task.start)
      timeline.segments.push_back({task.start, compute_end, TimelineKind::Off});
    if (tp > 0.0)
      timeline.segments.push_back({compute_end, task.end, TimelineKind::TpBurst});
    cursor = task.end;
  }
  return timeline;
}

}  // namespace traincast
