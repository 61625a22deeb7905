// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#include "traincast/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "traincast/errors.hpp"

namespace traincast {

namespace {

std::vector<std::int64_t> divisors_of(std::int64_t value) {
  std::vector<std::int64_t> out;
  for (std::int64_t i = 1; i * i <= value; ++i) {
    if (value % i != 0) continue;
    out.push_back(i);
    if (i != value / i) out.push_back(value / i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Candidate evaluate_candidate(const TuneRequest& request,
                             const ParallelismConfig& parallel,
                             const PlatformSpec& platform) {
  Candidate candidate;
  candidate.parallel = parallel;
  candidate.platform = platform;
  try {
    ScenarioConfig config{request.model, parallel, platform};
    candidate.prediction = predict_iteration(config, request.bandwidth,
                                             request.utilization, request.options);
    if (!candidate.prediction.memory_feasible) {
      candidate.exclusion_reason = "MemoryInfeasible";
      return candidate;
    }
    candidate.feasible = true;
  } catch (const Error& e) {
    candidate.exclusion_reason = e.name();
  }
  return candidate;
}

/// Evaluates all candidates; results are indexed by candidate so the merge
/// is deterministic regardless of thread scheduling.
std::vector<Candidate> evaluate_all(const TuneRequest& request,
                                    const std::vector<ParallelismConfig>& parallels,
                                    const std::vector<PlatformSpec>& platforms) {
  std::vector<Candidate> results(parallels.size());
  const std::int64_t count = static_cast<std::int64_t>(parallels.size());
  if (request.policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) {
      results[static_cast<std::size_t>(i)] = evaluate_candidate(
          request, parallels[static_cast<std::size_t>(i)],
          platforms[static_cast<std::size_t>(i)]);
    }
  } else {
    for (std::int64_t i = 0; i < count; ++i) {
      results[static_cast<std::size_t>(i)] = evaluate_candidate(
          request, parallels[static_cast<std::size_t>(i)],
          platforms[static_cast<std::size_t>(i)]);
    }
  }
  return results;
}

auto rank_key(const Candidate& c) {
  return std::make_tuple(c.prediction.breakdown.t_iter, c.parallel.micro_batch,
                         c.parallel.tp, c.parallel.pp, c.parallel.dp);
}

TuneReport assemble_report(std::vector<Candidate> candidates, bool allow_empty) {
  TuneReport report;
  for (Candidate& c : candidates) {
    (c.feasible ? report.ranked : report.excluded).push_back(std::move(c));
  }
  std::stable_sort(report.ranked.begin(), report.ranked.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return rank_key(a) < rank_key(b);
                   });
  if (report.ranked.empty() && !allow_empty)
    fail(Errc::NoFeasibleCandidate, "no candidate passed the feasibility filters");
  return report;
}

std::vector<std::int64_t> micro_batch_candidates_for(const TuneRequest& request,
                                                     std::int64_t dp) {
  if (!request.micro_batch_candidates.empty()) return request.micro_batch_candidates;
  if (dp < 1 || request.model.global_batch % dp != 0) return {};
  return divisors_of(request.model.global_batch / dp);
}

}  // namespace

TuneReport tune_micro_batch(const TuneRequest& request) {
  const auto batches = micro_batch_candidates_for(request, request.base.dp);
  if (batches.empty())
    fail(Errc::NoFeasibleCandidate,
         "per-replica batch is undefined: g mod d != 0 and no explicit candidates");
  std::vector<ParallelismConfig> parallels;
  std::vector<PlatformSpec> platforms;
  for (std::int64_t b : batches) {
    ParallelismConfig p = request.base;
    p.micro_batch = b;
    parallels.push_back(p);
    platforms.push_back(request.platform);
  }
  return assemble_report(evaluate_all(request, parallels, platforms), false);
}

TuneReport tune_parallelism(const TuneRequest& request) {
  std::vector<std::array<std::int64_t, 3>> layouts = request.layouts;
  if (layouts.empty()) {
    const std::int64_t gpus = request.platform.total_gpus();
    for (std::int64_t t : divisors_of(gpus)) {
      for (std::int64_t p : divisors_of(gpus / t)) {
        layouts.push_back({t, p, gpus / (t * p)});
      }
    }
  }

  std::vector<Candidate> outer;
  for (const auto& [t, p, d] : layouts) {
    TuneRequest inner = request;
    inner.base.tp = t;
    inner.base.pp = p;
    inner.base.dp = d;
    inner.micro_batch_candidates = request.micro_batch_candidates;
    const auto batches = micro_batch_candidates_for(inner, d);
    if (batches.empty()) {
      Candidate c;
      c.parallel = inner.base;
      c.platform = request.platform;
      c.exclusion_reason = "NonDivisibleBatch";
      outer.push_back(std::move(c));
      continue;
    }
    std::vector<ParallelismConfig> parallels;
    std::vector<PlatformSpec> platforms;
    for (std::int64_t b : batches) {
      ParallelismConfig cfg = inner.base;
      cfg.micro_batch = b;
      parallels.push_back(cfg);
      platforms.push_back(request.platform);
    }
    TuneReport layout_report =
        assemble_report(evaluate_all(request, parallels, platforms), true);
    if (!layout_report.ranked.empty()) {
      outer.push_back(std::move(layout_report.ranked.front()));
    } else {
      // Keep one exclusion entry per layout; the first reason is representative.
      Candidate c;
      c.parallel = inner.base;
      c.platform = request.platform;
      c.exclusion_reason = layout_report.excluded.empty()
                               ? "NoFeasibleCandidate"
                               : layout_report.excluded.front().exclusion_reason;
      outer.push_back(std::move(c));
    }
  }
  return assemble_report(std::move(outer), false);
}

TuneReport scale_analysis(const TuneRequest& request) {
  if (request.dp_sweep.empty())
    fail(Errc::NoFeasibleCandidate, "scale analysis needs a dp sweep range");

  auto evaluate_degree = [&](std::int64_t d) -> Candidate {
    TuneRequest inner = request;
    inner.base.dp = d;
    PlatformSpec platform = request.platform;
    const std::int64_t gpus = inner.base.tp * inner.base.pp * d;
    if (gpus % platform.gpus_per_machine == 0) {
      platform.machines = gpus / platform.gpus_per_machine;
    } else if (gpus < platform.gpus_per_machine &&
               platform.gpus_per_machine % gpus == 0) {
      // Sub-machine runs keep one machine's topology.
      platform.machines = 1;
      platform.gpus_per_machine = gpus;
    } else {
      Candidate c;
      c.parallel = inner.base;
      c.platform = platform;
      c.exclusion_reason = "GpuCountMismatch";
      return c;
    }
    inner.platform = platform;
    const auto batches = micro_batch_candidates_for(inner, d);
    if (batches.empty()) {
      Candidate c;
      c.parallel = inner.base;
      c.platform = platform;
      c.exclusion_reason = "NonDivisibleBatch";
      return c;
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> splits;
    if (request.layout_search_per_degree) {
      const std::int64_t budget = request.base.tp * request.base.pp;
      for (std::int64_t t : divisors_of(budget)) splits.push_back({t, budget / t});
    } else {
      splits.push_back({request.base.tp, request.base.pp});
    }
    std::vector<ParallelismConfig> parallels;
    std::vector<PlatformSpec> platforms;
    for (const auto& [t, p] : splits) {
      for (std::int64_t b : batches) {
        ParallelismConfig cfg = inner.base;
        cfg.tp = t;
        cfg.pp = p;
        cfg.micro_batch = b;
        parallels.push_back(cfg);
        platforms.push_back(platform);
      }
    }
    TuneReport inner_report =
        assemble_report(evaluate_all(inner, parallels, platforms), true);
    if (inner_report.ranked.empty()) {
      Candidate c;
      c.parallel = inner.base;
      c.platform = platform;
      c.exclusion_reason = inner_report.excluded.empty()
                               ? "NoFeasibleCandidate"
                               : inner_report.excluded.front().exclusion_reason;
      return c;
    }
    return std::move(inner_report.ranked.front());
  };

  Candidate baseline = evaluate_degree(1);
  const double baseline_iter =
      baseline.feasible ? baseline.prediction.breakdown.t_iter : 0.0;

  std::vector<Candidate> candidates;
  for (std::int64_t d : request.dp_sweep) {
    Candidate c = (d == 1) ? baseline : evaluate_degree(d);
    if (c.feasible) {
      const double t_iter = c.prediction.breakdown.t_iter;
      c.scaling_factor = (baseline_iter > 0.0 && t_iter > 0.0)
                             ? baseline_iter / t_iter
                             : 0.0;
      const double tokens_per_iter = static_cast<double>(request.model.global_batch) *
                                     static_cast<double>(request.model.seq_len);
      if (request.token_budget > 0.0 && tokens_per_iter > 0.0) {
        c.iterations = request.token_budget / tokens_per_iter;
        const double seconds = c.iterations * t_iter;
        const double hours = seconds / 3600.0;
        c.training_days = hours / 24.0;
        const double gpus = static_cast<double>(c.parallel.total_gpus());
        c.rent_cost = request.rent_rate * gpus * hours;
        c.buy_cost = request.gpu_price * gpus;
      }
    }
    candidates.push_back(std::move(c));
  }
  return assemble_report(std::move(candidates), false);
}

}  // namespace traincast
