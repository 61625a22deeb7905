// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0
//
// Serial vs OpenMP comparison for the two data-parallel kernels: traffic
// matrix assembly and tuner candidate evaluation.

#include <benchmark/benchmark.h>

#include "traincast/config.hpp"
#include "traincast/profiles.hpp"
#include "traincast/rank_mapping.hpp"
#include "traincast/traffic.hpp"
#include "traincast/tuner.hpp"

namespace {

using namespace traincast;

struct MatrixScenario {
  ModelSpec model;
  ParallelismConfig parallel;
  PlatformSpec platform;
  DerivedParams derived;
  RankMapping mapping;
};

MatrixScenario matrix_scenario(std::int64_t dp) {
  MatrixScenario s;
  s.model.param_count = 145e9;
  s.model.layers = 80;
  s.model.hidden = 12288;
  s.model.seq_len = 2048;
  s.model.attn_heads = 96;
  s.model.vocab_size = 51200;
  s.model.global_batch = 96 * dp;
  s.parallel.tp = 8;
  s.parallel.pp = 8;
  s.parallel.dp = dp;
  s.parallel.micro_batch = 6;
  s.platform.gpus_per_machine = 8;
  s.platform.machines = s.parallel.total_gpus() / 8;
  s.platform.peak_flops = 989e12;
  s.derived = validate(s.model, s.parallel, s.platform);
  s.mapping = map_ranks(s.parallel, s.platform);
  return s;
}

void bench_traffic_matrix(benchmark::State& state, ExecPolicy policy) {
  const MatrixScenario s = matrix_scenario(state.range(0));
  TrafficOptions options;
  options.policy = policy;
  for (auto _ : state) {
    const TrafficMatrix matrix =
        build_traffic_matrix(s.model, s.parallel, s.derived, s.mapping, options);
    benchmark::DoNotOptimize(matrix.classes[0].data());
  }
  state.SetLabel(std::to_string(s.mapping.n) + " ranks");
}

void BM_TrafficMatrixSerial(benchmark::State& state) {
  bench_traffic_matrix(state, ExecPolicy::Serial);
}
void BM_TrafficMatrixOpenMP(benchmark::State& state) {
  bench_traffic_matrix(state, ExecPolicy::Parallel);
}

TuneRequest sweep_request() {
  TuneRequest req;
  req.model.param_count = 39e9;
  req.model.layers = 48;
  req.model.hidden = 8192;
  req.model.seq_len = 2048;
  req.model.attn_heads = 64;
  req.model.global_batch = 720 * 16;  // per-replica 720: 30 candidates
  req.base.tp = 4;
  req.base.pp = 4;
  req.base.dp = 16;  // 256-rank mapping per candidate evaluation
  req.platform.machines = 32;
  req.platform.gpus_per_machine = 8;
  req.platform.peak_flops = 989e12;
  req.platform.gpu_mem_bytes = 640e9;
  req.bandwidth = default_bandwidth_profile();
  req.utilization = default_utilization_profile();
  return req;
}

void bench_tuner(benchmark::State& state, ExecPolicy policy) {
  TuneRequest req = sweep_request();
  req.policy = policy;
  for (auto _ : state) {
    const TuneReport report = tune_micro_batch(req);
    benchmark::DoNotOptimize(report.ranked.data());
  }
}

void BM_TunerSweepSerial(benchmark::State& state) {
  bench_tuner(state, ExecPolicy::Serial);
}
void BM_TunerSweepOpenMP(benchmark::State& state) {
  bench_tuner(state, ExecPolicy::Parallel);
}

}  // namespace

BENCHMARK(BM_TrafficMatrixSerial)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrafficMatrixOpenMP)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TunerSweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TunerSweepOpenMP)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
