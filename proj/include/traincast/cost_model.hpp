// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "traincast/types.hpp"

namespace traincast {

/// Effective bandwidths for the four communication phases, bytes/s.
struct PhaseBandwidths {
  double c_tp = 1.0;
  double c_pp = 1.0;
  double c_dp = 1.0;
  double c_ata = 1.0;  // ignored for dense models
};

struct CostOptions {
  // Recomputation on: 6 TP AllReduces per layer per micro-batch and 8
  // FLOPs/param/token. Off: 4 AllReduces and 6 FLOPs/param/token.
  bool recompute = true;
  std::int64_t k_active = 2;       // active experts per token for the ATA phase
  double dp_overlap_fraction = 0.0;  // fraction of DP time hidden under backward
};

struct CostBreakdown {
  double t_comp = 0.0;
  double t_tp = 0.0;
  double t_pp = 0.0;
  double t_dp = 0.0;
  double t_ata = 0.0;
  double t_bubble = 0.0;
  double t_iter = 0.0;
  double t_comp_mb = 0.0;
  double t_tp_mb = 0.0;
  double t_pp_mb = 0.0;
  double flops_per_mb = 0.0;
  double r_bubble = 0.0;         // exact-from-times: t_bubble / t_iter
  double r_bubble_approx = 0.0;  // (p-1)/((p-1+m) * v), drops T_DP
  double r_comm = 0.0;           // (t_tp + t_pp + t_dp + t_ata) / t_iter
};

struct PhaseTime {
  double total = 0.0;
  double per_mb = 0.0;
};

/// TP AllReduce time: per micro-batch, layers_per_stage * ops AllReduces of
/// 2bsh bytes each, ring factor 2(t-1)/t. Zero when t = 1.
PhaseTime tp_time(const ModelSpec& model, const ParallelismConfig& parallel,
                  const DerivedParams& derived, double c_tp,
                  const CostOptions& options = {});

/// PP send/recv time at a stage boundary: one send and one recv of 2bsh per
/// micro-batch, times the interleave factor. Zero when p = 1.
PhaseTime pp_time(const ModelSpec& model, const ParallelismConfig& parallel,
                  const DerivedParams& derived, double c_pp);

/// DP gradient AllReduce of the 2N/(p*t) shard once per iteration. Zero when
/// d = 1.
double dp_time(const ModelSpec& model, const ParallelismConfig& parallel,
               double c_dp);

struct ComputeTime {
  double total = 0.0;
  double per_mb = 0.0;
  double flops_per_mb = 0.0;
};

/// FLOPs-per-micro-batch model: 8 * (N / (p*t)) * b * s with recomputation
/// (6 without), derated by the utilization factor mu of peak F.
ComputeTime comp_time(const ModelSpec& model, const ParallelismConfig& parallel,
                      const DerivedParams& derived, double peak_flops, double mu,
                      const CostOptions& options = {});

struct BubbleResult {
  double time = 0.0;      // (p-1) * (t_comp_mb + t_tp_mb + t_pp_mb) / v
  double ratio_approx = 0.0;  // (p-1) / ((p-1+m) * v)
};

BubbleResult bubble(std::int64_t p, std::int64_t m, std::int64_t v,
                    double t_comp_mb, double t_tp_mb, double t_pp_mb);

/// MoE AllToAll time over one iteration: 6 AllToAlls per expert layer moving
/// k_active * 2gsh bytes split across the e-wide expert group.
/// Errors: NotMoeModel for dense inputs.
double alltoall_time(const ModelSpec& model, std::int64_t e, double c_ata,
                     std::int64_t k_active);

/// Full per-iteration assembly. The phase-sum and the per-micro-batch
/// decompositions are both computed and must agree to 1e-9 relative.
CostBreakdown iteration(const ModelSpec& model, const ParallelismConfig& parallel,
                        const DerivedParams& derived, const PhaseBandwidths& bw,
                        double peak_flops, double mu,
                        const CostOptions& options = {});

}  // namespace traincast
