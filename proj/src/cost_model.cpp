// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#include "traincast/cost_model.hpp"

#include <cmath>
#include <string>

#include "traincast/errors.hpp"

namespace traincast {

namespace {

void check_bandwidth(double c, const char* which) {
  if (!(c > 0.0))
    fail(Errc::NonPositiveBandwidth,
         std::string(which) + " must be > 0, got " + std::to_string(c));
}

double activation_bytes(const ModelSpec& model, const ParallelismConfig& parallel) {
  return static_cast<double>(model.precision_bytes) *
         static_cast<double>(parallel.micro_batch) *
         static_cast<double>(model.seq_len) * static_cast<double>(model.hidden);
}

}  // namespace

PhaseTime tp_time(const ModelSpec& model, const ParallelismConfig& parallel,
                  const DerivedParams& derived, double c_tp,
                  const CostOptions& options) {
  check_bandwidth(c_tp, "c_tp");
  const double t = static_cast<double>(parallel.tp);
  const double ops = options.recompute ? 6.0 : 4.0;
  const double bytes_per_mb = static_cast<double>(derived.layers_per_stage) * ops *
                              activation_bytes(model, parallel) * 2.0 * (t - 1.0) / t;
  PhaseTime out;
  out.per_mb = bytes_per_mb / c_tp;
  out.total = static_cast<double>(derived.micro_batches) * out.per_mb;
  return out;
}

PhaseTime pp_time(const ModelSpec& model, const ParallelismConfig& parallel,
                  const DerivedParams& derived, double c_pp) {
  check_bandwidth(c_pp, "c_pp");
  PhaseTime out;
  if (parallel.pp == 1) return out;
  const double bytes_per_mb = 2.0 * activation_bytes(model, parallel) *
                              static_cast<double>(parallel.interleave);
  out.per_mb = bytes_per_mb / c_pp;
  out.total = static_cast<double>(derived.micro_batches) * out.per_mb;
  return out;
}

double dp_time(const ModelSpec& model, const ParallelismConfig& parallel,
               double c_dp) {
  check_bandwidth(c_dp, "c_dp");
  const double d = static_cast<double>(parallel.dp);
  const double shard = static_cast<double>(model.precision_bytes) *
                       model.param_count /
                       static_cast<double>(parallel.pp * parallel.tp);
  return shard * 2.0 * (d - 1.0) / d / c_dp;
}

ComputeTime comp_time(const ModelSpec& model, const ParallelismConfig& parallel,
                      const DerivedParams& derived, double peak_flops, double mu,
                      const CostOptions& options) {
  if (!(mu > 0.0 && mu <= 1.0))
    fail(Errc::InvalidSpec, "mu must be in (0, 1], got " + std::to_string(mu));
  if (!(peak_flops > 0.0)) fail(Errc::InvalidSpec, "peak_flops must be > 0");
  const double flops_per_param_token = options.recompute ? 8.0 : 6.0;
  ComputeTime out;
  out.flops_per_mb = flops_per_param_token * derived.params_per_gpu *
                     static_cast<double>(parallel.micro_batch) *
                     static_cast<double>(model.seq_len);
  out.per_mb = out.flops_per_mb / (mu * peak_flops);
  out.total = static_cast<double>(derived.micro_batches) * out.per_mb;
  return out;
}

BubbleResult bubble(std::int64_t p, std::int64_t m, std::int64_t v,
                    double t_comp_mb, double t_tp_mb, double t_pp_mb) {
  if (p < 1 || m < 1 || v < 1)
    fail(Errc::InvalidSpec, "bubble needs p, m, v >= 1");
  BubbleResult out;
  if (p == 1) return out;
  const double ramp = static_cast<double>(p - 1);
  out.time = ramp * (t_comp_mb + t_tp_mb + t_pp_mb) / static_cast<double>(v);
  out.ratio_approx = ramp / ((ramp + static_cast<double>(m)) * static_cast<double>(v));
  return out;
}

double alltoall_time(const ModelSpec& model, std::int64_t e, double c_ata,
                     std::int64_t k_active) {
  if (!model.is_moe())
    fail(Errc::NotMoeModel, "AllToAll phase applies to MoE models only");
  if (e < 1) fail(Errc::InvalidSpec, "expert degree must be >= 1");
  if (k_active < 1 || k_active > model.moe_top_k_max)
    fail(Errc::InvalidSpec, "k_active must be in [1, moe_top_k_max]");
  check_bandwidth(c_ata, "c_ata");
  const double expert_layers = static_cast<double>(model.layers) /
                               static_cast<double>(model.moe_expert_interval);
  const double token_bytes = static_cast<double>(model.precision_bytes) *
                             static_cast<double>(model.global_batch) *
                             static_cast<double>(model.seq_len) *
                             static_cast<double>(model.hidden);
  const double bytes = expert_layers * 6.0 * static_cast<double>(k_active) *
                       token_bytes / static_cast<double>(e);
  return bytes / c_ata;
}

CostBreakdown iteration(const ModelSpec& model, const ParallelismConfig& parallel,
                        const DerivedParams& derived, const PhaseBandwidths& bw,
                        double peak_flops, double mu, const CostOptions& options) {
  CostBreakdown out;
  const ComputeTime comp = comp_time(model, parallel, derived, peak_flops, mu, options);
  const PhaseTime tp = tp_time(model, parallel, derived, bw.c_tp, options);
  const PhaseTime pp = pp_time(model, parallel, derived, bw.c_pp);
  const double dp_raw = dp_time(model, parallel, bw.c_dp);

  out.t_comp = comp.total;
  out.t_comp_mb = comp.per_mb;
  out.flops_per_mb = comp.flops_per_mb;
  out.t_tp = tp.total;
  out.t_tp_mb = tp.per_mb;
  out.t_pp = pp.total;
  out.t_pp_mb = pp.per_mb;
  out.t_dp = dp_raw * (1.0 - options.dp_overlap_fraction);
  if (model.is_moe())
    out.t_ata = alltoall_time(model, parallel.ep, bw.c_ata, options.k_active);

  const BubbleResult bub =
      bubble(parallel.pp, derived.micro_batches, parallel.interleave,
             out.t_comp_mb, out.t_tp_mb, out.t_pp_mb);
  out.t_bubble = bub.time;
  out.r_bubble_approx = bub.ratio_approx;

  // Phase-sum assembly and the per-micro-batch assembly must agree.
  const double via_phases =
      out.t_comp + out.t_tp + out.t_pp + out.t_dp + out.t_ata + out.t_bubble;
  const double via_blocks =
      static_cast<double>(derived.micro_batches) *
          (out.t_comp_mb + out.t_pp_mb + out.t_tp_mb) +
      out.t_bubble + out.t_dp + out.t_ata;
  out.t_iter = via_phases;
  if (via_phases > 0.0 &&
      std::abs(via_phases - via_blocks) > 1e-9 * via_phases) {
    fail(Errc::InvalidSpec, "iteration-time assemblies diverged");
  }

  if (out.t_iter > 0.0) {
    out.r_bubble = out.t_bubble / out.t_iter;
    out.r_comm = (out.t_tp + out.t_pp + out.t_dp + out.t_ata) / out.t_iter;
  }
  return out;
}

}  // namespace traincast
