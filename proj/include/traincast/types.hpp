// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

namespace traincast {

enum class ModelKind { DenseGpt, Moe };

const char* model_kind_name(ModelKind kind) noexcept;

/// Architecture of a GPT or GPT-MoE model. `param_count` is authoritative
/// when supplied; estimate_param_count() exists only as an opt-in helper.
struct ModelSpec {
  ModelKind kind = ModelKind::DenseGpt;
  double param_count = 0.0;        // N, total parameters
  std::int64_t layers = 1;         // l, transformer blocks
  std::int64_t hidden = 1;         // h, elements
  std::int64_t seq_len = 1;        // s, tokens
  std::int64_t global_batch = 1;   // g, sequences
  std::int64_t attn_heads = 1;
  std::int64_t vocab_size = 0;     // optional; enables embedding-sync volume
  std::int64_t precision_bytes = 2;
  std::int64_t moe_expert_interval = 2;  // layers between expert layers
  std::int64_t moe_top_k_max = 2;        // max experts per token

  bool is_moe() const noexcept { return kind == ModelKind::Moe; }
};

/// Parallelism degrees plus schedule granularity. Expert-parallel groups are
/// folded into the data-parallel dimension, so total GPUs = pp * tp * dp.
struct ParallelismConfig {
  std::int64_t pp = 1;           // p, pipeline stages
  std::int64_t tp = 1;           // t
  std::int64_t dp = 1;           // d
  std::int64_t ep = 1;           // e, 1 for dense models
  std::int64_t micro_batch = 1;  // b, sequences
  std::int64_t interleave = 1;   // v, model chunks per stage

  std::int64_t total_gpus() const noexcept { return pp * tp * dp; }
};

struct DerivedParams {
  std::int64_t micro_batches = 1;    // m = g / (d*b)
  std::int64_t layers_per_stage = 1; // l / p
  double params_per_gpu = 0.0;       // N / (p*t)
};

enum class IntraTopology { Pcie, Nvlink, Nvswitch };

const char* intra_topology_name(IntraTopology topo) noexcept;

struct PlatformSpec {
  std::int64_t machines = 1;
  std::int64_t gpus_per_machine = 1;
  double peak_flops = 1.0;      // F, peak FP16 FLOP/s per GPU
  double gpu_mem_bytes = 0.0;   // 0 disables the memory feasibility filter
  IntraTopology intra_topology = IntraTopology::Nvswitch;
  std::int64_t nics_per_machine = 1;
  double nic_bw = 0.0;          // bytes/s per NIC, informational

  std::int64_t total_gpus() const noexcept { return machines * gpus_per_machine; }
};

}  // namespace traincast
