// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "traincast/config.hpp"
#include "traincast/cost_model.hpp"
#include "traincast/errors.hpp"
#include "traincast/predict.hpp"
#include "traincast/profiles.hpp"
#include "traincast/schedule_sim.hpp"

using namespace traincast;

namespace {

struct Toy {
  ModelSpec model;
  ParallelismConfig parallel;
  DerivedParams derived;
};

// l=4, p=2, b=1, s=2, h=4, m=3 from the worked examples.
Toy toy_case() {
  Toy t;
  t.model.param_count = 1000;
  t.model.layers = 4;
  t.model.hidden = 4;
  t.model.seq_len = 2;
  t.model.global_batch = 3;
  t.parallel.pp = 2;
  t.parallel.tp = 2;
  t.parallel.micro_batch = 1;
  t.derived.micro_batches = 3;
  t.derived.layers_per_stage = 2;
  t.derived.params_per_gpu = 250;
  return t;
}

Toy random_valid(std::mt19937_64& rng) {
  Toy t;
  t.parallel.pp = static_cast<std::int64_t>(1 << (rng() % 3));
  t.parallel.tp = static_cast<std::int64_t>(1 << (rng() % 3));
  t.parallel.dp = static_cast<std::int64_t>(1 << (rng() % 3));
  t.parallel.micro_batch = static_cast<std::int64_t>(rng() % 4 + 1);
  t.parallel.interleave = static_cast<std::int64_t>(1 << (rng() % 2));
  t.model.kind = (rng() % 3 == 0) ? ModelKind::Moe : ModelKind::DenseGpt;
  if (t.model.is_moe()) {
    t.parallel.ep = t.parallel.dp;
  }
  t.model.layers = t.parallel.pp * t.parallel.interleave *
                   static_cast<std::int64_t>(rng() % 4 + 1) * 2;
  t.model.hidden = static_cast<std::int64_t>(rng() % 512 + 8);
  t.model.seq_len = static_cast<std::int64_t>(rng() % 256 + 8);
  t.model.param_count = static_cast<double>(rng() % 1000000 + 1000);
  const std::int64_t m = static_cast<std::int64_t>(rng() % 16 + 1);
  t.model.global_batch = m * t.parallel.dp * t.parallel.micro_batch;
  t.derived.micro_batches = m;
  t.derived.layers_per_stage = t.model.layers / t.parallel.pp;
  t.derived.params_per_gpu =
      t.model.param_count / static_cast<double>(t.parallel.pp * t.parallel.tp);
  return t;
}

PhaseBandwidths random_bw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(1e8, 2e11);
  return {dist(rng), dist(rng), dist(rng), dist(rng)};
}

}  // namespace

TEST_CASE("tp_time worked example") {
  const Toy t = toy_case();
  SUBCASE("t=1 zeroes the phase") {
    ParallelismConfig serial = t.parallel;
    serial.tp = 1;
    const PhaseTime out = tp_time(t.model, serial, t.derived, 1.0);
    CHECK(out.total == 0.0);
    CHECK(out.per_mb == 0.0);
  }
  SUBCASE("direct evaluation: 192 s per micro-batch, 576 s per iteration") {
    const PhaseTime out = tp_time(t.model, t.parallel, t.derived, 1.0);
    CHECK(out.per_mb == 192.0);
    CHECK(out.total == 576.0);
  }
}

TEST_CASE("pp_time worked example") {
  const Toy t = toy_case();
  SUBCASE("p=1 zeroes the phase") {
    ParallelismConfig flat = t.parallel;
    flat.pp = 1;
    CHECK(pp_time(t.model, flat, t.derived, 1.0).total == 0.0);
  }
  SUBCASE("2bsh each way: 32 s per micro-batch") {
    const PhaseTime out = pp_time(t.model, t.parallel, t.derived, 1.0);
    CHECK(out.per_mb == 32.0);
  }
  SUBCASE("interleaving doubles PP time") {
    ParallelismConfig chunked = t.parallel;
    chunked.interleave = 2;
    const PhaseTime base = pp_time(t.model, t.parallel, t.derived, 1.0);
    const PhaseTime doubled = pp_time(t.model, chunked, t.derived, 1.0);
    CHECK(doubled.per_mb == 2.0 * base.per_mb);
    CHECK(doubled.total == 2.0 * base.total);
  }
}

TEST_CASE("dp_time worked example") {
  ModelSpec m;
  m.param_count = 1000;
  ParallelismConfig par;
  par.pp = 2;
  par.tp = 2;
  SUBCASE("d=1 zeroes the phase") {
    par.dp = 1;
    CHECK(dp_time(m, par, 1.0) == 0.0);
  }
  SUBCASE("N=1000, p=t=2, d=4: 750 s at 1 B/s") {
    par.dp = 4;
    CHECK(dp_time(m, par, 1.0) == 750.0);
  }
}

TEST_CASE("comp_time worked example") {
  ModelSpec m;
  m.param_count = 1000;
  m.seq_len = 8;
  ParallelismConfig par;
  par.pp = 2;
  par.tp = 2;
  par.micro_batch = 4;
  DerivedParams derived;
  derived.micro_batches = 2;
  derived.params_per_gpu = 250;
  const ComputeTime out = comp_time(m, par, derived, 1000.0, 1.0);
  CHECK(out.flops_per_mb == 64000.0);
  CHECK(out.total == 128.0);
  // Halving mu doubles the time exactly.
  const ComputeTime half = comp_time(m, par, derived, 1000.0, 0.5);
  CHECK(half.total == 2.0 * out.total);
}

TEST_CASE("bubble worked examples") {
  SUBCASE("p=1: no bubble") {
    const BubbleResult out = bubble(1, 8, 1, 1.0, 1.0, 1.0);
    CHECK(out.time == 0.0);
    CHECK(out.ratio_approx == 0.0);
  }
  SUBCASE("p=4, m=8: ratio 3/11") {
    const BubbleResult out = bubble(4, 8, 1, 1.0, 0.0, 0.0);
    CHECK(out.ratio_approx == doctest::Approx(3.0 / 11.0).epsilon(1e-15));
    CHECK(out.time == 3.0);
  }
  SUBCASE("interleaving halves both forms") {
    const BubbleResult v1 = bubble(4, 8, 1, 1.0, 0.5, 0.25);
    const BubbleResult v2 = bubble(4, 8, 2, 1.0, 0.5, 0.25);
    CHECK(v2.time == doctest::Approx(v1.time / 2).epsilon(1e-15));
    CHECK(v2.ratio_approx == doctest::Approx(v1.ratio_approx / 2).epsilon(1e-15));
    CHECK(v2.ratio_approx == doctest::Approx(3.0 / 22.0).epsilon(1e-15));
  }
}

TEST_CASE("alltoall_time worked examples") {
  ModelSpec m;
  m.kind = ModelKind::Moe;
  m.param_count = 1000;
  m.layers = 4;
  m.hidden = 4;
  m.seq_len = 2;
  m.global_batch = 2;
  SUBCASE("l=4, g=2, s=2, h=4, e=2, k=2: 384 s") {
    CHECK(alltoall_time(m, 2, 1.0, 2) == 384.0);
  }
  SUBCASE("k_active=1 halves it") {
    CHECK(alltoall_time(m, 2, 1.0, 1) == 192.0);
  }
  SUBCASE("dense models have no AllToAll phase") {
    m.kind = ModelKind::DenseGpt;
    try {
      alltoall_time(m, 2, 1.0, 2);
      FAIL("expected NotMoeModel");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NotMoeModel);
    }
  }
}

TEST_CASE("single GPU iteration is pure compute") {
  ModelSpec m;
  m.param_count = 1e9;
  m.layers = 4;
  m.hidden = 64;
  m.seq_len = 32;
  m.global_batch = 8;
  ParallelismConfig par;
  par.micro_batch = 2;
  DerivedParams derived;
  derived.micro_batches = 4;
  derived.layers_per_stage = 4;
  derived.params_per_gpu = 1e9;
  const CostBreakdown out = iteration(m, par, derived, {}, 1e12, 0.5);
  CHECK(out.t_iter == out.t_comp);
  CHECK(out.t_tp == 0.0);
  CHECK(out.t_pp == 0.0);
  CHECK(out.t_dp == 0.0);
  CHECK(out.t_bubble == 0.0);
  CHECK(out.r_comm == 0.0);
}

TEST_CASE("dual assembly agrees over randomized configurations") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const Toy t = random_valid(rng);
    const PhaseBandwidths bw = random_bw(rng);
    const CostBreakdown out =
        iteration(t.model, t.parallel, t.derived, bw, 1e12, 0.5);
    const double eq1 =
        out.t_comp + out.t_tp + out.t_pp + out.t_dp + out.t_ata + out.t_bubble;
    const double eq6 = static_cast<double>(t.derived.micro_batches) *
                           (out.t_comp_mb + out.t_pp_mb + out.t_tp_mb) +
                       out.t_bubble + out.t_dp + out.t_ata;
    CHECK(std::abs(eq1 - eq6) <= 1e-9 * eq1);
    CHECK(out.t_iter == eq1);
  }
}

TEST_CASE("bandwidth homogeneity: doubling c halves t exactly") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const Toy t = random_valid(rng);
    const PhaseBandwidths bw = random_bw(rng);
    PhaseBandwidths doubled = bw;
    doubled.c_tp *= 2;
    CHECK(tp_time(t.model, t.parallel, t.derived, doubled.c_tp).total * 2 ==
          tp_time(t.model, t.parallel, t.derived, bw.c_tp).total);
    doubled = bw;
    doubled.c_pp *= 2;
    CHECK(pp_time(t.model, t.parallel, t.derived, doubled.c_pp).total * 2 ==
          pp_time(t.model, t.parallel, t.derived, bw.c_pp).total);
    doubled = bw;
    doubled.c_dp *= 2;
    CHECK(dp_time(t.model, t.parallel, doubled.c_dp) * 2 ==
          dp_time(t.model, t.parallel, bw.c_dp));
  }
}

TEST_CASE("r_bubble approximation is bandwidth- and mu-independent") {
  std::mt19937_64 rng(47);
  const Toy t = toy_case();
  DerivedParams derived = t.derived;
  for (int trial = 0; trial < 50; ++trial) {
    const CostBreakdown a =
        iteration(t.model, t.parallel, derived, random_bw(rng), 1e12, 0.3);
    const CostBreakdown b =
        iteration(t.model, t.parallel, derived, random_bw(rng), 1e13, 0.9);
    CHECK(a.r_bubble_approx == b.r_bubble_approx);
  }
  // Strictly decreasing in m, strictly increasing in p.
  CHECK(bubble(4, 8, 1, 1, 0, 0).ratio_approx >
        bubble(4, 16, 1, 1, 0, 0).ratio_approx);
  CHECK(bubble(6, 8, 1, 1, 0, 0).ratio_approx >
        bubble(4, 8, 1, 1, 0, 0).ratio_approx);
}

TEST_CASE("145B with bundled profiles: TP dominates communication") {
  ScenarioConfig cfg;
  cfg.model.param_count = 145e9;
  cfg.model.layers = 80;
  cfg.model.hidden = 12288;
  cfg.model.seq_len = 2048;
  cfg.model.global_batch = 2304;
  cfg.model.attn_heads = 96;
  cfg.model.vocab_size = 51200;
  cfg.parallel.tp = 8;
  cfg.parallel.pp = 8;
  cfg.parallel.dp = 1;
  cfg.parallel.micro_batch = 6;
  cfg.platform.machines = 8;
  cfg.platform.gpus_per_machine = 8;
  cfg.platform.peak_flops = 989e12;
  cfg.platform.gpu_mem_bytes = 85.9e9;
  cfg.platform.intra_topology = IntraTopology::Nvswitch;

  const Prediction p = predict_iteration(cfg, default_bandwidth_profile(),
                                         default_utilization_profile());
  const double comm =
      p.breakdown.t_tp + p.breakdown.t_pp + p.breakdown.t_dp + p.breakdown.t_ata;
  const double tp_share = p.breakdown.t_tp / comm;
  CHECK(tp_share >= 0.85);
  CHECK(tp_share <= 0.99);
  CHECK(p.breakdown.r_comm >= 0.10);
  CHECK(p.breakdown.r_comm <= 0.45);
  CHECK(p.memory_feasible);
}

TEST_CASE("39B with bundled profiles: DP stays near 1% of the iteration") {
  ScenarioConfig cfg;
  cfg.model.param_count = 39e9;
  cfg.model.layers = 48;
  cfg.model.hidden = 8192;
  cfg.model.seq_len = 2048;
  cfg.model.global_batch = 96;
  cfg.model.attn_heads = 64;
  cfg.model.vocab_size = 51200;
  cfg.parallel.tp = 4;
  cfg.parallel.pp = 4;
  cfg.parallel.dp = 2;
  cfg.parallel.micro_batch = 6;
  cfg.platform.machines = 4;
  cfg.platform.gpus_per_machine = 8;
  cfg.platform.peak_flops = 989e12;
  cfg.platform.intra_topology = IntraTopology::Nvswitch;

  const Prediction p = predict_iteration(cfg, default_bandwidth_profile(),
                                         default_utilization_profile());
  CHECK(p.breakdown.t_dp / p.breakdown.t_iter < 0.02);
  CHECK(p.breakdown.t_pp / p.breakdown.t_iter < 0.02);
}

TEST_CASE("MoE formula stays within 10% of the schedule simulator") {
  // MoE-1.3B shape on 8 GPUs: the formula's constant-bubble approximation is
  // checked against the event-driven oracle.
  ModelSpec m;
  m.kind = ModelKind::Moe;
  m.param_count = 1.3e9;
  m.layers = 24;
  m.hidden = 2048;
  m.seq_len = 1024;
  m.global_batch = 32;
  ParallelismConfig par;
  par.pp = 2;
  par.tp = 1;
  par.dp = 4;
  par.ep = 4;
  par.micro_batch = 1;
  PlatformSpec plat;
  plat.machines = 1;
  plat.gpus_per_machine = 8;
  plat.peak_flops = 100e12;
  const DerivedParams derived = validate(m, par, plat);
  PhaseBandwidths bw;
  bw.c_tp = 1e11;
  bw.c_pp = 2e10;
  bw.c_dp = 2e10;
  bw.c_ata = 3e10;
  const CostBreakdown formula = iteration(m, par, derived, bw, plat.peak_flops, 0.4);

  SimInput sim;
  sim.stages = par.pp;
  sim.micro_batches = derived.micro_batches;
  sim.fwd = formula.t_comp_mb / 4.0;
  sim.bwd = formula.t_comp_mb * 3.0 / 4.0;
  sim.tp_fwd = formula.t_tp_mb / 3.0;
  sim.tp_bwd = formula.t_tp_mb * 2.0 / 3.0;
  sim.pp_hop = formula.t_pp_mb / 2.0;
  const SimResult oracle = simulate(sim);
  // Comm phases the simulator does not schedule are appended, as the
  // formula's assembly does.
  const double oracle_iter = oracle.iteration_time + formula.t_dp + formula.t_ata;
  CHECK(std::abs(formula.t_iter - oracle_iter) / oracle_iter < 0.10);
}
