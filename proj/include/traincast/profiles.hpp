// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "traincast/types.hpp"

namespace traincast {

enum class CollOp { P2p, AllReduce, AllToAll };
enum class Locality { Intra, Inter };

const char* coll_op_name(CollOp op) noexcept;
const char* locality_name(Locality locality) noexcept;

struct BandwidthRecord {
  CollOp op = CollOp::AllReduce;
  Locality locality = Locality::Intra;
  std::string topology;       // pcie | nvlink | nvswitch | free-form tag
  std::int64_t scale = 0;     // collective group size; 0 = any scale
  std::uint64_t msg_bytes = 0;
  double bw = 0.0;            // effective bus bandwidth, bytes/s
};

/// Message-size -> effective-bandwidth curves keyed by (op, locality,
/// topology, scale). Lookup interpolates piecewise-linearly in
/// log2(message size), clamps outside the sampled range, and is exact at
/// sample points. A missing key is a hard MissingProfileKey error; the only
/// sanctioned fallback is an explicit scale-0 (any-scale) record family.
class BandwidthProfile {
 public:
  struct Key {
    CollOp op;
    Locality locality;
    std::string topology;
    std::int64_t scale;
    auto operator<=>(const Key&) const = default;
  };

  static BandwidthProfile ingest(const std::vector<BandwidthRecord>& records);

  /// Later records override earlier ones at the same (key, msg_bytes).
  void merge(const std::vector<BandwidthRecord>& records);

  double lookup(CollOp op, Locality locality, const std::string& topology,
                std::int64_t scale, std::uint64_t msg_bytes) const;

  bool empty() const { return curves_.empty(); }
  std::size_t size() const;
  std::vector<BandwidthRecord> records() const;  // sorted, deduplicated

 private:
  // Each curve is sorted by msg_bytes with unique sizes.
  std::map<Key, std::vector<std::pair<std::uint64_t, double>>> curves_;
};

struct UtilizationRecord {
  double params_per_gpu = 0.0;
  std::int64_t micro_batch = 0;
  double mu = 0.0;  // in (0, 1]
};

/// GPU utilization keyed on (per-GPU model size, micro-batch size) only;
/// measurements from a single GPU stand in for any parallel scale. Lookup is
/// nearest-neighbor in params_per_gpu, then linear in micro-batch between
/// bracketing samples, clamped at the ends.
class UtilizationProfile {
 public:
  static UtilizationProfile ingest(const std::vector<UtilizationRecord>& records);
  void merge(const std::vector<UtilizationRecord>& records);

  double lookup(double params_per_gpu, std::int64_t micro_batch) const;

  bool empty() const { return rows_.empty(); }
  std::size_t size() const;
  std::vector<UtilizationRecord> records() const;

 private:
  // params_per_gpu -> sorted (micro_batch, mu) curve.
  std::map<double, std::vector<std::pair<std::int64_t, double>>> rows_;
};

// CSV round trip. Bandwidth header: op,locality,topology,scale,msg_bytes,
// bw_bytes_per_s. Utilization header: params_per_gpu,micro_batch,mu.
std::vector<BandwidthRecord> parse_bandwidth_csv(const std::string& text);
std::vector<UtilizationRecord> parse_utilization_csv(const std::string& text);
std::string bandwidth_to_csv(const BandwidthProfile& profile);
std::string utilization_to_csv(const UtilizationProfile& profile);

struct ProfileBundle {
  BandwidthProfile bandwidth;
  UtilizationProfile utilization;
};

/// Reads one profile CSV, detecting bandwidth vs utilization by header.
void load_profile_file(const std::filesystem::path& path, ProfileBundle& bundle);

/// Coarse two-knot curves encoding the reference measurements this tool was
/// calibrated against (paper-derived defaults): intra-node p2p maxima of
/// 13.2 / 48.4 / 174 GB/s for pcie / nvlink / nvswitch with saturation at
/// 2 / 16 / 128 MB, AllReduce bus-bandwidth plateaus near 50 / 1000 / 1500
/// Gbps, and scale-insensitive inter-node AllReduce. Meant as a starting
/// point; ingest real benchmark logs to override.
BandwidthProfile default_bandwidth_profile();
UtilizationProfile default_utilization_profile();

}  // namespace traincast
