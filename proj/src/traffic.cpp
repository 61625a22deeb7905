// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#include "traincast/traffic.hpp"

#include <algorithm>
#include <cmath>

#include "traincast/errors.hpp"

namespace traincast {

const char* traffic_class_name(TrafficClass cls) noexcept {
  switch (cls) {
    case TrafficClass::Tp: return "tp";
    case TrafficClass::Pp: return "pp";
    case TrafficClass::Dp: return "dp";
    case TrafficClass::EmbSync: return "embsync";
    case TrafficClass::Ata: return "alltoall";
  }
  return "unknown";
}

std::uint64_t RingAllReduceRenderer::edge_bytes(std::int64_t group_size,
                                                std::uint64_t payload,
                                                std::int64_t src_index) const {
  if (group_size <= 1) return 0;
  // Chunk i has size q+1 for i < rem, else q. Over the 2*(k-1) steps the edge
  // src -> src+1 carries every chunk except (src+1)%k once during
  // reduce-scatter and every chunk except (src+2)%k once during all-gather.
  const std::uint64_t k = static_cast<std::uint64_t>(group_size);
  const std::uint64_t q = payload / k;
  const std::uint64_t rem = payload % k;
  auto chunk = [&](std::uint64_t index) { return q + (index < rem ? 1 : 0); };
  const std::uint64_t skip_rs = static_cast<std::uint64_t>((src_index + 1) % group_size);
  const std::uint64_t skip_ag = static_cast<std::uint64_t>((src_index + 2) % group_size);
  return 2 * payload - chunk(skip_rs) - chunk(skip_ag);
}

const AllReduceRenderer& ring_renderer() noexcept {
  static const RingAllReduceRenderer renderer;
  return renderer;
}

std::uint64_t TrafficMatrix::class_total(TrafficClass cls) const {
  std::uint64_t sum = 0;
  for (const TrafficEdge& edge : edges(cls)) sum += edge.bytes;
  return sum;
}

std::uint64_t TrafficMatrix::total() const {
  std::uint64_t sum = 0;
  for (int c = 0; c < kTrafficClassCount; ++c)
    sum += class_total(static_cast<TrafficClass>(c));
  return sum;
}

std::uint64_t TrafficMatrix::at(TrafficClass cls, std::int64_t src,
                                std::int64_t dst) const {
  const auto& list = edges(cls);
  auto it = std::lower_bound(list.begin(), list.end(), std::pair{src, dst},
                             [](const TrafficEdge& e, const std::pair<std::int64_t, std::int64_t>& key) {
                               return std::pair{e.src, e.dst} < key;
                             });
  if (it != list.end() && it->src == src && it->dst == dst) return it->bytes;
  return 0;
}

namespace {

void sort_edges(std::vector<TrafficEdge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const TrafficEdge& a, const TrafficEdge& b) {
    return std::pair{a.src, a.dst} < std::pair{b.src, b.dst};
  });
}

/// Fills `out[group * group_size + member]` for renderer-backed classes.
void fill_ring_class(const std::vector<std::vector<std::int64_t>>& groups,
                     std::uint64_t payload, std::uint64_t ops,
                     const AllReduceRenderer& renderer, ExecPolicy policy,
                     std::vector<TrafficEdge>& out) {
  if (groups.empty()) return;
  const std::int64_t k = static_cast<std::int64_t>(groups.front().size());
  if (k <= 1) return;
  out.resize(groups.size() * static_cast<std::size_t>(k));
  const std::int64_t total = static_cast<std::int64_t>(out.size());
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t idx = 0; idx < total; ++idx) {
      const auto& group = groups[static_cast<std::size_t>(idx / k)];
      const std::int64_t member = idx % k;
      out[static_cast<std::size_t>(idx)] = {
          group[static_cast<std::size_t>(member)],
          group[static_cast<std::size_t>((member + 1) % k)],
          ops * renderer.edge_bytes(k, payload, member)};
    }
  } else {
    out.clear();
    for (const auto& group : groups) {
      for (std::int64_t member = 0; member < k; ++member) {
        out.push_back({group[static_cast<std::size_t>(member)],
                       group[static_cast<std::size_t>((member + 1) % k)],
                       ops * renderer.edge_bytes(k, payload, member)});
      }
    }
  }
  sort_edges(out);
}

}  // namespace

TrafficMatrix build_traffic_matrix(const ModelSpec& model,
                                   const ParallelismConfig& parallel,
                                   const DerivedParams& derived,
                                   const RankMapping& mapping,
                                   const TrafficOptions& options) {
  const AllReduceRenderer& renderer =
      options.renderer ? *options.renderer : ring_renderer();
  TrafficMatrix matrix;
  matrix.n = mapping.n;

  const std::uint64_t precision = static_cast<std::uint64_t>(model.precision_bytes);
  const std::uint64_t activation_payload =
      precision * static_cast<std::uint64_t>(parallel.micro_batch) *
      static_cast<std::uint64_t>(model.seq_len) *
      static_cast<std::uint64_t>(model.hidden);
  const std::uint64_t m = static_cast<std::uint64_t>(derived.micro_batches);

  // TP: 6 AllReduce (4 without recomputation) of 2bsh per layer per micro-batch.
  const std::uint64_t tp_ops_per_mb = options.recompute ? 6 : 4;
  const std::uint64_t tp_ops =
      m * static_cast<std::uint64_t>(derived.layers_per_stage) * tp_ops_per_mb;
  fill_ring_class(mapping.tp_groups, activation_payload, tp_ops, renderer,
                  options.policy, matrix.classes[static_cast<int>(TrafficClass::Tp)]);

  // DP: one AllReduce of the 2N/(p*t) gradient shard per iteration.
  const std::uint64_t dp_payload = static_cast<std::uint64_t>(
      std::llround(static_cast<double>(precision) * derived.params_per_gpu));
  fill_ring_class(mapping.dp_groups, dp_payload, 1, renderer, options.policy,
                  matrix.classes[static_cast<int>(TrafficClass::Dp)]);

  // PP: 2bsh per micro-batch per direction per stage boundary, xV interleaved.
  if (mapping.p > 1) {
    auto& pp = matrix.classes[static_cast<int>(TrafficClass::Pp)];
    const std::uint64_t pp_bytes =
        m * activation_payload * static_cast<std::uint64_t>(parallel.interleave);
    const std::int64_t stage_span = mapping.t * mapping.d;
    pp.resize(static_cast<std::size_t>(2 * (mapping.p - 1) * stage_span));
    const std::int64_t boundary_edges = (mapping.p - 1) * stage_span;
    if (options.policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
      for (std::int64_t idx = 0; idx < boundary_edges; ++idx) {
        const std::int64_t src = idx;  // stages 0..p-2 occupy ranks 0..boundary_edges-1
        const std::int64_t dst = src + stage_span;
        pp[static_cast<std::size_t>(2 * idx)] = {src, dst, pp_bytes};
        pp[static_cast<std::size_t>(2 * idx + 1)] = {dst, src, pp_bytes};
      }
    } else {
      pp.clear();
      for (std::int64_t src = 0; src < boundary_edges; ++src) {
        pp.push_back({src, src + stage_span, pp_bytes});
        pp.push_back({src + stage_span, src, pp_bytes});
      }
    }
    sort_edges(pp);
  }

  // EmbSync: first/last stage peers exchange embedding-table gradients.
  if (mapping.p > 1 && model.vocab_size > 0) {
    auto& emb = matrix.classes[static_cast<int>(TrafficClass::EmbSync)];
    const std::uint64_t emb_bytes = precision *
                                    static_cast<std::uint64_t>(model.vocab_size) *
                                    static_cast<std::uint64_t>(model.hidden);
    const std::int64_t stage_span = mapping.t * mapping.d;
    const std::int64_t last_base = (mapping.p - 1) * stage_span;
    for (std::int64_t i = 0; i < stage_span; ++i) {
      emb.push_back({i, last_base + i, emb_bytes});
      emb.push_back({last_base + i, i, emb_bytes});
    }
    sort_edges(emb);
  }

  // AllToAll: expected uniform matrix per expert group, diagonal dropped.
  if (model.is_moe() && !mapping.ep_groups.empty() && mapping.e > 1) {
    auto& ata = matrix.classes[static_cast<int>(TrafficClass::Ata)];
    const std::uint64_t ata_ops =
        static_cast<std::uint64_t>(model.layers / model.moe_expert_interval) * 6;
    const double per_pair =
        static_cast<double>(options.k_active) * static_cast<double>(precision) *
        static_cast<double>(model.global_batch) * static_cast<double>(model.seq_len) *
        static_cast<double>(model.hidden) /
        (static_cast<double>(mapping.e) * static_cast<double>(mapping.e));
    const std::uint64_t pair_bytes =
        ata_ops * static_cast<std::uint64_t>(std::llround(per_pair));
    const std::int64_t e = mapping.e;
    const std::int64_t pairs_per_group = e * (e - 1);
    const std::int64_t total =
        static_cast<std::int64_t>(mapping.ep_groups.size()) * pairs_per_group;
    ata.resize(static_cast<std::size_t>(total));
    if (options.policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
      for (std::int64_t idx = 0; idx < total; ++idx) {
        const auto& group = mapping.ep_groups[static_cast<std::size_t>(idx / pairs_per_group)];
        const std::int64_t pair = idx % pairs_per_group;
        const std::int64_t a = pair / (e - 1);
        std::int64_t b = pair % (e - 1);
        if (b >= a) ++b;  // skip the diagonal
        ata[static_cast<std::size_t>(idx)] = {group[static_cast<std::size_t>(a)],
                                              group[static_cast<std::size_t>(b)],
                                              pair_bytes};
      }
    } else {
      ata.clear();
      for (const auto& group : mapping.ep_groups) {
        for (std::int64_t a = 0; a < e; ++a) {
          for (std::int64_t b = 0; b < e; ++b) {
            if (a == b) continue;
            ata.push_back({group[static_cast<std::size_t>(a)],
                           group[static_cast<std::size_t>(b)], pair_bytes});
          }
        }
      }
    }
    sort_edges(ata);
  }

  return matrix;
}

const char* timeline_kind_name(TimelineKind kind) noexcept {
  switch (kind) {
    case TimelineKind::TpBurst: return "tp-burst";
    case TimelineKind::PpBurst: return "pp-burst";
    case TimelineKind::Off: return "off";
  }
  return "off";
}

double Timeline::on_time() const {
  double sum = 0.0;
  for (const TimelineSegment& seg : segments)
    if (seg.kind != TimelineKind::Off) sum += seg.end_s - seg.start_s;
  return sum;
}

double Timeline::span() const {
  return segments.empty() ? 0.0 : segments.back().end_s;
}

Timeline onoff_timeline(const DerivedParams& derived, double comp_per_block,
                        double tp_per_block, double pp_per_block) {
  if (comp_per_block < 0 || tp_per_block < 0 || pp_per_block < 0)
    fail(Errc::InvalidSpec, "timeline durations must be >= 0");
  Timeline timeline;
  timeline.blocks = 2 * derived.micro_batches;
  const std::int64_t bursts = derived.layers_per_stage * 6;
  const double off_slice = comp_per_block / static_cast<double>(bursts);
  const double tp_slice = tp_per_block / static_cast<double>(bursts);

  double cursor = 0.0;
  auto emit = [&](double duration, TimelineKind kind) {
    if (duration <= 0.0) return;
    timeline.segments.push_back({cursor, cursor + duration, kind});
    cursor += duration;
  };
  for (std::int64_t block = 0; block < timeline.blocks; ++block) {
    for (std::int64_t burst = 0; burst < bursts; ++burst) {
      emit(off_slice, TimelineKind::Off);
      emit(tp_slice, TimelineKind::TpBurst);
    }
    emit(pp_per_block, TimelineKind::PpBurst);
  }
  return timeline;
}

}  // namespace traincast
