// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "traincast/predict.hpp"
#include "traincast/profiles.hpp"
#include "traincast/traffic.hpp"

namespace traincast {

struct TuneRequest {
  ModelSpec model;
  PlatformSpec platform;
  ParallelismConfig base;  // fixed degrees for the dimensions not searched

  BandwidthProfile bandwidth;
  UtilizationProfile utilization;
  PredictOptions options;

  // Search dimensions; at least one must be used by the chosen operation.
  std::vector<std::int64_t> micro_batch_candidates;       // empty: divisors of g/d
  std::vector<std::array<std::int64_t, 3>> layouts;       // (t, p, d); empty: enumerate
  std::vector<std::int64_t> dp_sweep;                     // data-parallel degrees

  // Cost analysis inputs for scale_analysis.
  double token_budget = 0.0;    // tokens
  double rent_rate = 0.0;       // currency per GPU-hour
  double gpu_price = 0.0;       // currency per GPU

  // DP sweeps reuse the fixed (t, p); this re-searches the split of the
  // model-parallel budget t*p at every swept degree instead.
  bool layout_search_per_degree = false;

  ExecPolicy policy = ExecPolicy::Parallel;
};

struct Candidate {
  ParallelismConfig parallel;
  PlatformSpec platform;  // machines follow the candidate's GPU count
  bool feasible = false;
  std::string exclusion_reason;  // machine-readable, empty when feasible
  Prediction prediction;

  // Populated by scale_analysis.
  double scaling_factor = 0.0;
  double iterations = 0.0;
  double training_days = 0.0;
  double rent_cost = 0.0;
  double buy_cost = 0.0;
};

/// Feasible candidates ranked by ascending t_iter with the deterministic
/// tie-break (smaller b, then t, then p); excluded candidates keep their
/// machine-readable reason. ranked.front() is the recommendation.
struct TuneReport {
  std::vector<Candidate> ranked;
  std::vector<Candidate> excluded;
};

/// Fixed (t, p, d); searches micro-batch sizes that divide the per-replica
/// batch and pass the memory filter. Errors: NoFeasibleCandidate.
TuneReport tune_micro_batch(const TuneRequest& request);

/// Fixed GPU count; enumerates (t, p, d) factorizations (or evaluates the
/// given layouts) with inner micro-batch tuning per layout.
TuneReport tune_parallelism(const TuneRequest& request);

/// Fixed (t, p), fixed global batch; sweeps the data-parallel degree and
/// reports scaling factors, training time and rent/buy costs per degree.
/// Individual infeasible degrees are excluded, not fatal.
TuneReport scale_analysis(const TuneRequest& request);

}  // namespace traincast
