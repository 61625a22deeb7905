// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#include "traincast/predict.hpp"

#include <cmath>

namespace traincast {

ResolvedRates resolve_rates(const ModelSpec& model, const ParallelismConfig& parallel,
                            const DerivedParams& derived, const PlatformSpec& platform,
                            const RankMapping& mapping, const BandwidthProfile& bandwidth,
                            const UtilizationProfile& utilization,
                            const PredictOptions& options) {
  ResolvedRates rates;
  rates.tp_locality = mapping.inter_machine_tp ? Locality::Inter : Locality::Intra;
  rates.pp_locality = mapping.inter_machine_pp ? Locality::Inter : Locality::Intra;
  rates.dp_locality = mapping.inter_machine_dp ? Locality::Inter : Locality::Intra;
  rates.ata_locality = mapping.inter_machine_ep ? Locality::Inter : Locality::Intra;
  const std::string topo = intra_topology_name(platform.intra_topology);

  const double activation = static_cast<double>(model.precision_bytes) *
                            static_cast<double>(parallel.micro_batch) *
                            static_cast<double>(model.seq_len) *
                            static_cast<double>(model.hidden);
  const auto msg = [](double bytes) {
    return static_cast<std::uint64_t>(std::llround(std::max(1.0, bytes)));
  };

  if (parallel.tp > 1) {
    rates.bw.c_tp = bandwidth.lookup(CollOp::AllReduce, rates.tp_locality, topo,
                                     parallel.tp, msg(activation));
  }
  if (parallel.pp > 1) {
    rates.bw.c_pp = bandwidth.lookup(CollOp::P2p, rates.pp_locality, topo, 2,
                                     msg(activation));
  }
  if (parallel.dp > 1) {
    const double shard = static_cast<double>(model.precision_bytes) *
                         derived.params_per_gpu /
                         static_cast<double>(options.dp_buckets);
    rates.bw.c_dp = bandwidth.lookup(CollOp::AllReduce, rates.dp_locality, topo,
                                     parallel.dp, msg(shard));
  }
  if (model.is_moe() && parallel.ep > 1) {
    const double per_pair = static_cast<double>(options.cost.k_active) *
                            static_cast<double>(model.precision_bytes) *
                            static_cast<double>(model.global_batch) *
                            static_cast<double>(model.seq_len) *
                            static_cast<double>(model.hidden) /
                            (static_cast<double>(parallel.ep) *
                             static_cast<double>(parallel.ep));
    rates.bw.c_ata = bandwidth.lookup(CollOp::AllToAll, rates.ata_locality, topo,
                                      parallel.ep, msg(per_pair));
  }
  rates.mu = utilization.lookup(derived.params_per_gpu, parallel.micro_batch);
  return rates;
}

Prediction predict_iteration(const ScenarioConfig& config,
                             const BandwidthProfile& bandwidth,
                             const UtilizationProfile& utilization,
                             const PredictOptions& options) {
  Prediction out;
  out.derived = validate(config.model, config.parallel, config.platform);
  const RankMapping mapping =
      map_ranks(config.parallel, config.platform, options.mapping);
  out.inter_machine_tp = mapping.inter_machine_tp;
  out.rates = resolve_rates(config.model, config.parallel, out.derived,
                            config.platform, mapping, bandwidth, utilization, options);
  out.breakdown = iteration(config.model, config.parallel, out.derived,
                            out.rates.bw, config.platform.peak_flops,
                            out.rates.mu, options.cost);
  out.memory_bytes = estimate_memory_per_gpu(config.model, config.parallel);
  out.memory_feasible = config.platform.gpu_mem_bytes <= 0.0 ||
                        out.memory_bytes <= config.platform.gpu_mem_bytes;
  if (out.breakdown.t_iter > 0.0) {
    const double cluster_flops_per_iter =
        out.breakdown.flops_per_mb *
        static_cast<double>(out.derived.micro_batches) *
        static_cast<double>(config.parallel.total_gpus());
    out.throughput_flops = cluster_flops_per_iter / out.breakdown.t_iter;
  }
  return out;
}

}  // namespace traincast
