// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "traincast/types.hpp"

namespace traincast {

/// Checks cross-field consistency and derives schedule-level quantities.
///
/// Errors: NonDivisibleBatch (g mod d*b != 0), NonDivisibleLayers
/// (l mod p*v != 0), GpuCountMismatch (p*t*d != machines*gpus_per_machine),
/// NonDivisibleExpertGroups (MoE with d mod e != 0), InvalidSpec for field
/// invariant violations.
DerivedParams validate(const ModelSpec& model, const ParallelismConfig& parallel,
                       const PlatformSpec& platform);

/// Convenience estimator N ~= 12*l*h^2 + vocab*h + s*h (weights + token and
/// position embeddings). Never used when param_count is supplied explicitly.
double estimate_param_count(std::int64_t layers, std::int64_t hidden,
                            std::int64_t vocab_size, std::int64_t seq_len);

struct MemoryModelOptions {
  // fp16 weight + grad, fp32 master + two Adam moments.
  double bytes_per_param = 16.0;
  // Per-layer activation bytes = s*b*h*(fixed + attn*heads*s/h) / t.
  double activation_fixed_factor = 34.0;
  double activation_attn_factor = 5.0;
};

/// Feasibility filter for the tuner: parameter/optimizer state plus the
/// per-stage activation footprint with selective recomputation assumed on
/// (in-flight micro-batches keep only boundary activations, which the
/// per-layer term already bounds). Strictly increasing in b, non-increasing
/// in t and p.
double estimate_memory_per_gpu(const ModelSpec& model,
                               const ParallelismConfig& parallel,
                               const MemoryModelOptions& options = {});

/// One scenario file describes model + parallelism + platform together.
struct ScenarioConfig {
  ModelSpec model;
  ParallelismConfig parallel;
  PlatformSpec platform;
};

ScenarioConfig parse_config_json(const std::string& json_text);
ScenarioConfig load_config_file(const std::filesystem::path& path);

/// Canonical JSON echo of a scenario; re-feeding it to the loader yields the
/// same scenario, and reports embed it so outputs are reproducible.
std::string config_to_json(const ScenarioConfig& config);

/// FNV-1a digest of the canonical echo; stable across load/echo round trips.
std::string config_digest(const ScenarioConfig& config);

}  // namespace traincast
