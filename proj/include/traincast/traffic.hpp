// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "traincast/rank_mapping.hpp"
#include "traincast/types.hpp"

namespace traincast {

enum class TrafficClass : int { Tp = 0, Pp = 1, Dp = 2, EmbSync = 3, Ata = 4 };
inline constexpr int kTrafficClassCount = 5;
const char* traffic_class_name(TrafficClass cls) noexcept;

enum class ExecPolicy { Serial, Parallel };

/// Renders one collective's payload into per-edge byte counts. The default
/// ring renderer splits the payload into group_size chunks and circulates
/// them through 2*(k-1) steps, so summed edges equal 2*(k-1)*payload exactly.
class AllReduceRenderer {
 public:
  virtual ~AllReduceRenderer() = default;
  /// Bytes that member `src_index` sends to its ring successor.
  virtual std::uint64_t edge_bytes(std::int64_t group_size, std::uint64_t payload,
                                   std::int64_t src_index) const = 0;
};

class RingAllReduceRenderer final : public AllReduceRenderer {
 public:
  std::uint64_t edge_bytes(std::int64_t group_size, std::uint64_t payload,
                           std::int64_t src_index) const override;
};

const AllReduceRenderer& ring_renderer() noexcept;

struct TrafficEdge {
  std::int64_t src = 0;
  std::int64_t dst = 0;
  std::uint64_t bytes = 0;
};

/// Directed per-iteration byte volumes, one sparse edge list per class.
/// Diagonal entries never appear; volumes are integers (quantized to bytes).
struct TrafficMatrix {
  std::int64_t n = 0;
  std::array<std::vector<TrafficEdge>, kTrafficClassCount> classes;

  const std::vector<TrafficEdge>& edges(TrafficClass cls) const {
    return classes[static_cast<int>(cls)];
  }
  std::uint64_t class_total(TrafficClass cls) const;
  std::uint64_t total() const;
  /// Zero when the directed pair carries no traffic of this class.
  std::uint64_t at(TrafficClass cls, std::int64_t src, std::int64_t dst) const;
};

struct TrafficOptions {
  bool recompute = true;  // 6 TP AllReduces per layer per micro-batch, else 4
  std::int64_t k_active = 2;
  ExecPolicy policy = ExecPolicy::Parallel;
  const AllReduceRenderer* renderer = nullptr;  // default: ring
};

/// Per-iteration communication matrix. TP and DP collectives are rendered as
/// ring edges, PP as the forward/backward shifted diagonals, EmbSync between
/// first/last stage peers, and the MoE AllToAll class as the expected uniform
/// matrix embedded per expert group.
TrafficMatrix build_traffic_matrix(const ModelSpec& model,
                                   const ParallelismConfig& parallel,
                                   const DerivedParams& derived,
                                   const RankMapping& mapping,
                                   const TrafficOptions& options = {});

enum class TimelineKind { TpBurst, PpBurst, Off };
const char* timeline_kind_name(TimelineKind kind) noexcept;

struct TimelineSegment {
  double start_s = 0.0;
  double end_s = 0.0;
  TimelineKind kind = TimelineKind::Off;
};

struct Timeline {
  std::vector<TimelineSegment> segments;  // non-overlapping, sorted
  std::int64_t blocks = 0;                // 2m micro-batch blocks
  double on_time() const;
  double span() const;
};

/// One rank's On-Off transmission pattern over an iteration: 2m identical
/// micro-batch blocks, each interleaving layers_per_stage*6 TP bursts with
/// compute (off) slices and closing with one PP burst. Durations are
/// per-block values; callers splitting a per-micro-batch total across the
/// forward and backward block pass half of it here.
Timeline onoff_timeline(const DerivedParams& derived, double comp_per_block,
                        double tp_per_block, double pp_per_block);

}  // namespace traincast
