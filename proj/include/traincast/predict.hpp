// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "traincast/config.hpp"
#include "traincast/cost_model.hpp"
#include "traincast/profiles.hpp"
#include "traincast/rank_mapping.hpp"

namespace traincast {

struct PredictOptions {
  CostOptions cost;
  MappingOptions mapping;
  // DP gradient buckets; the lookup message size is the shard divided by this.
  std::int64_t dp_buckets = 1;
};

/// Phase bandwidths and utilization resolved from the profiles. Lookup
/// message sizes: 2bsh for TP and PP, 2N/(p*t)/buckets for DP and the
/// expected per-pair volume for AllToAll; localities come from the mapping.
struct ResolvedRates {
  PhaseBandwidths bw;
  double mu = 0.0;
  Locality tp_locality = Locality::Intra;
  Locality pp_locality = Locality::Inter;
  Locality dp_locality = Locality::Intra;
  Locality ata_locality = Locality::Intra;
};

ResolvedRates resolve_rates(const ModelSpec& model, const ParallelismConfig& parallel,
                            const DerivedParams& derived, const PlatformSpec& platform,
                            const RankMapping& mapping, const BandwidthProfile& bandwidth,
                            const UtilizationProfile& utilization,
                            const PredictOptions& options = {});

struct Prediction {
  DerivedParams derived;
  ResolvedRates rates;
  CostBreakdown breakdown;
  double memory_bytes = 0.0;
  bool memory_feasible = true;
  double throughput_flops = 0.0;  // cluster-wide achieved FLOP/s
  bool inter_machine_tp = false;
};

/// Full pipeline: validate, map ranks, resolve rates, assemble the breakdown.
Prediction predict_iteration(const ScenarioConfig& config,
                             const BandwidthProfile& bandwidth,
                             const UtilizationProfile& utilization,
                             const PredictOptions& options = {});

}  // namespace traincast
