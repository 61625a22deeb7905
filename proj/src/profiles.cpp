// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#include "traincast/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "traincast/errors.hpp"

namespace traincast {

const char* coll_op_name(CollOp op) noexcept {
  switch (op) {
    case CollOp::P2p: return "p2p";
    case CollOp::AllReduce: return "allreduce";
    case CollOp::AllToAll: return "alltoall";
  }
  return "allreduce";
}

const char* locality_name(Locality locality) noexcept {
  return locality == Locality::Intra ? "intra" : "inter";
}

namespace {

CollOp parse_op(const std::string& s) {
  if (s == "p2p") return CollOp::P2p;
  if (s == "allreduce") return CollOp::AllReduce;
  if (s == "alltoall") return CollOp::AllToAll;
  fail(Errc::MalformedRow, "unknown op: " + s);
}

Locality parse_locality(const std::string& s) {
  if (s == "intra") return Locality::Intra;
  if (s == "inter") return Locality::Inter;
  fail(Errc::MalformedRow, "unknown locality: " + s);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos
                         ? std::string()
                         : field.substr(first, last - first + 1));
  }
  return fields;
}

double parse_double_field(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(Errc::MalformedRow, "cannot parse " + what + ": '" + s + "'");
  }
}

std::int64_t parse_int_field(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const std::int64_t v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(Errc::MalformedRow, "cannot parse " + what + ": '" + s + "'");
  }
}

// Round-trip float formatting for profile export.
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lg", &back);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[40];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lg", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

}  // namespace

BandwidthProfile BandwidthProfile::ingest(const std::vector<BandwidthRecord>& records) {
  BandwidthProfile profile;
  profile.merge(records);
  return profile;
}

void BandwidthProfile::merge(const std::vector<BandwidthRecord>& records) {
  for (const BandwidthRecord& rec : records) {
    if (rec.bw <= 0.0)
      fail(Errc::NonPositiveBandwidth,
           "bandwidth must be > 0, got " + std::to_string(rec.bw));
    if (rec.scale < 0)
      fail(Errc::MalformedRow, "scale must be >= 0");
    auto& curve = curves_[Key{rec.op, rec.locality, rec.topology, rec.scale}];
    auto it = std::lower_bound(
        curve.begin(), curve.end(), rec.msg_bytes,
        [](const auto& knot, std::uint64_t size) { return knot.first < size; });
    if (it != curve.end() && it->first == rec.msg_bytes) {
      it->second = rec.bw;  // last record wins
    } else {
      curve.insert(it, {rec.msg_bytes, rec.bw});
    }
  }
}

double BandwidthProfile::lookup(CollOp op, Locality locality,
                                const std::string& topology, std::int64_t scale,
                                std::uint64_t msg_bytes) const {
  auto it = curves_.find(Key{op, locality, topology, scale});
  if (it == curves_.end() && scale != 0)
    it = curves_.find(Key{op, locality, topology, 0});  // explicit any-scale rows
  if (it == curves_.end() || it->second.empty()) {
    fail(Errc::MissingProfileKey,
         std::string("no bandwidth records for (") + coll_op_name(op) + ", " +
             locality_name(locality) + ", " + topology + ", scale " +
             std::to_string(scale) + ")");
  }
  const auto& curve = it->second;
  if (msg_bytes <= curve.front().first) return curve.front().second;
  if (msg_bytes >= curve.back().first) return curve.back().second;
  const auto hi = std::lower_bound(
      curve.begin(), curve.end(), msg_bytes,
      [](const auto& knot, std::uint64_t size) { return knot.first < size; });
  if (hi->first == msg_bytes) return hi->second;
  const auto lo = hi - 1;
  const double x0 = std::log2(static_cast<double>(lo->first));
  const double x1 = std::log2(static_cast<double>(hi->first));
  const double x = std::log2(static_cast<double>(msg_bytes));
  const double w = (x - x0) / (x1 - x0);
  return lo->second + w * (hi->second - lo->second);
}

std::size_t BandwidthProfile::size() const {
  std::size_t count = 0;
  for (const auto& [key, curve] : curves_) count += curve.size();
  return count;
}

std::vector<BandwidthRecord> BandwidthProfile::records() const {
  std::vector<BandwidthRecord> out;
  for (const auto& [key, curve] : curves_)
    for (const auto& [size, bw] : curve)
      out.push_back({key.op, key.locality, key.topology, key.scale, size, bw});
  return out;
}

UtilizationProfile UtilizationProfile::ingest(
    const std::vector<UtilizationRecord>& records) {
  UtilizationProfile profile;
  profile.merge(records);
  return profile;
}

void UtilizationProfile::merge(const std::vector<UtilizationRecord>& records) {
  for (const UtilizationRecord& rec : records) {
    if (!(rec.mu > 0.0 && rec.mu <= 1.0))
      fail(Errc::MalformedRow, "mu must be in (0, 1], got " + std::to_string(rec.mu));
    if (rec.params_per_gpu <= 0.0 || rec.micro_batch < 1)
      fail(Errc::MalformedRow, "utilization rows need params > 0 and b >= 1");
    auto& curve = rows_[rec.params_per_gpu];
    auto it = std::lower_bound(
        curve.begin(), curve.end(), rec.micro_batch,
        [](const auto& knot, std::int64_t b) { return knot.first < b; });
    if (it != curve.end() && it->first == rec.micro_batch) {
      it->second = rec.mu;
    } else {
      curve.insert(it, {rec.micro_batch, rec.mu});
    }
  }
}

double UtilizationProfile::lookup(double params_per_gpu,
                                  std::int64_t micro_batch) const {
  if (rows_.empty()) fail(Errc::EmptyProfile, "utilization profile is empty");
  // Nearest sampled model size; ties resolve to the smaller size.
  auto best = rows_.begin();
  double best_dist = std::abs(best->first - params_per_gpu);
  for (auto it = std::next(rows_.begin()); it != rows_.end(); ++it) {
    const double dist = std::abs(it->first - params_per_gpu);
    if (dist < best_dist) {
      best = it;
      best_dist = dist;
    }
  }
  const auto& curve = best->second;
  if (micro_batch <= curve.front().first) return curve.front().second;
  if (micro_batch >= curve.back().first) return curve.back().second;
  const auto hi = std::lower_bound(
      curve.begin(), curve.end(), micro_batch,
      [](const auto& knot, std::int64_t b) { return knot.first < b; });
  if (hi->first == micro_batch) return hi->second;
  const auto lo = hi - 1;
  const double w = static_cast<double>(micro_batch - lo->first) /
                   static_cast<double>(hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

std::size_t UtilizationProfile::size() const {
  std::size_t count = 0;
  for (const auto& [params, curve] : rows_) count += curve.size();
  return count;
}

std::vector<UtilizationRecord> UtilizationProfile::records() const {
  std::vector<UtilizationRecord> out;
  for (const auto& [params, curve] : rows_)
    for (const auto& [b, mu] : curve) out.push_back({params, b, mu});
  return out;
}

std::vector<BandwidthRecord> parse_bandwidth_csv(const std::string& text) {
  std::vector<BandwidthRecord> records;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      if (!fields.empty() && fields[0] == "op") continue;  // header row
    }
    if (fields.size() != 6)
      fail(Errc::MalformedRow, "expected 6 columns, got " +
                                   std::to_string(fields.size()) + ": " + line);
    BandwidthRecord rec;
    rec.op = parse_op(fields[0]);
    rec.locality = parse_locality(fields[1]);
    rec.topology = fields[2];
    rec.scale = parse_int_field(fields[3], "scale");
    const std::int64_t msg = parse_int_field(fields[4], "msg_bytes");
    if (msg < 0) fail(Errc::MalformedRow, "msg_bytes must be >= 0");
    rec.msg_bytes = static_cast<std::uint64_t>(msg);
    rec.bw = parse_double_field(fields[5], "bw_bytes_per_s");
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<UtilizationRecord> parse_utilization_csv(const std::string& text) {
  std::vector<UtilizationRecord> records;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      if (!fields.empty() && fields[0] == "params_per_gpu") continue;
    }
    if (fields.size() != 3)
      fail(Errc::MalformedRow, "expected 3 columns, got " +
                                   std::to_string(fields.size()) + ": " + line);
    UtilizationRecord rec;
    rec.params_per_gpu = parse_double_field(fields[0], "params_per_gpu");
    rec.micro_batch = parse_int_field(fields[1], "micro_batch");
    rec.mu = parse_double_field(fields[2], "mu");
    records.push_back(rec);
  }
  return records;
}

std::string bandwidth_to_csv(const BandwidthProfile& profile) {
  std::ostringstream out;
  out << "op,locality,topology,scale,msg_bytes,bw_bytes_per_s\n";
  for (const BandwidthRecord& rec : profile.records()) {
    out << coll_op_name(rec.op) << ',' << locality_name(rec.locality) << ','
        << rec.topology << ',' << rec.scale << ',' << rec.msg_bytes << ','
        << format_double(rec.bw) << '\n';
  }
  return out.str();
}

std::string utilization_to_csv(const UtilizationProfile& profile) {
  std::ostringstream out;
  out << "params_per_gpu,micro_batch,mu\n";
  for (const UtilizationRecord& rec : profile.records()) {
    out << format_double(rec.params_per_gpu) << ',' << rec.micro_batch << ','
        << format_double(rec.mu) << '\n';
  }
  return out.str();
}

void load_profile_file(const std::filesystem::path& path, ProfileBundle& bundle) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open profile file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::istringstream scan(text);
  std::string first_line;
  while (std::getline(scan, first_line)) {
    if (!first_line.empty() && first_line[0] != '#') break;
  }
  if (first_line.rfind("params_per_gpu", 0) == 0) {
    bundle.utilization.merge(parse_utilization_csv(text));
  } else {
    bundle.bandwidth.merge(parse_bandwidth_csv(text));
  }
}

namespace {

constexpr std::uint64_t kKiB = 1024;
constexpr std::uint64_t kMiB = 1024 * 1024;

}  // namespace

BandwidthProfile default_bandwidth_profile() {
  // Two-knot curves; the lookup clamp produces the plateau beyond the last
  // knot. Scale 0 marks the rows as any-scale.
  const std::vector<BandwidthRecord> records = {
      // intra-node p2p, plateaus at 2 / 16 / 128 MB
      {CollOp::P2p, Locality::Intra, "pcie", 0, 64 * kKiB, 2.5e9},
      {CollOp::P2p, Locality::Intra, "pcie", 0, 2 * kMiB, 13.2e9},
      {CollOp::P2p, Locality::Intra, "nvlink", 0, 64 * kKiB, 5.0e9},
      {CollOp::P2p, Locality::Intra, "nvlink", 0, 16 * kMiB, 48.4e9},
      {CollOp::P2p, Locality::Intra, "nvswitch", 0, 64 * kKiB, 8.0e9},
      {CollOp::P2p, Locality::Intra, "nvswitch", 0, 128 * kMiB, 174.0e9},
      // intra-node allreduce bus bandwidth: ~50 / ~1000 / ~1500 Gbps
      {CollOp::AllReduce, Locality::Intra, "pcie", 0, 64 * kKiB, 1.2e9},
      {CollOp::AllReduce, Locality::Intra, "pcie", 0, 2 * kMiB, 6.25e9},
      {CollOp::AllReduce, Locality::Intra, "nvlink", 0, 64 * kKiB, 8.0e9},
      {CollOp::AllReduce, Locality::Intra, "nvlink", 0, 16 * kMiB, 125.0e9},
      {CollOp::AllReduce, Locality::Intra, "nvswitch", 0, 64 * kKiB, 12.0e9},
      {CollOp::AllReduce, Locality::Intra, "nvswitch", 0, 128 * kMiB, 187.5e9},
      // intra-node alltoall, modestly below allreduce
      {CollOp::AllToAll, Locality::Intra, "pcie", 0, 64 * kKiB, 1.0e9},
      {CollOp::AllToAll, Locality::Intra, "pcie", 0, 2 * kMiB, 5.0e9},
      {CollOp::AllToAll, Locality::Intra, "nvlink", 0, 64 * kKiB, 6.0e9},
      {CollOp::AllToAll, Locality::Intra, "nvlink", 0, 16 * kMiB, 100.0e9},
      {CollOp::AllToAll, Locality::Intra, "nvswitch", 0, 64 * kKiB, 10.0e9},
      {CollOp::AllToAll, Locality::Intra, "nvswitch", 0, 128 * kMiB, 150.0e9},
      // inter-node p2p: shared 100Gb NIC for pcie/nvlink hosts, one 400Gb
      // NIC per GPU on nvswitch hosts
      {CollOp::P2p, Locality::Inter, "pcie", 0, 64 * kKiB, 0.8e9},
      {CollOp::P2p, Locality::Inter, "pcie", 0, 8 * kMiB, 11.0e9},
      {CollOp::P2p, Locality::Inter, "nvlink", 0, 64 * kKiB, 0.8e9},
      {CollOp::P2p, Locality::Inter, "nvlink", 0, 8 * kMiB, 11.0e9},
      {CollOp::P2p, Locality::Inter, "nvswitch", 0, 64 * kKiB, 2.0e9},
      {CollOp::P2p, Locality::Inter, "nvswitch", 0, 64 * kMiB, 47.0e9},
      // inter-node allreduce, scale-insensitive
      {CollOp::AllReduce, Locality::Inter, "pcie", 0, 64 * kKiB, 0.6e9},
      {CollOp::AllReduce, Locality::Inter, "pcie", 0, 32 * kMiB, 10.0e9},
      {CollOp::AllReduce, Locality::Inter, "nvlink", 0, 64 * kKiB, 0.8e9},
      {CollOp::AllReduce, Locality::Inter, "nvlink", 0, 32 * kMiB, 20.0e9},
      {CollOp::AllReduce, Locality::Inter, "nvswitch", 0, 64 * kKiB, 2.0e9},
      {CollOp::AllReduce, Locality::Inter, "nvswitch", 0, 128 * kMiB, 45.0e9},
      // inter-node alltoall
      {CollOp::AllToAll, Locality::Inter, "pcie", 0, 64 * kKiB, 0.5e9},
      {CollOp::AllToAll, Locality::Inter, "pcie", 0, 32 * kMiB, 8.0e9},
      {CollOp::AllToAll, Locality::Inter, "nvlink", 0, 64 * kKiB, 0.6e9},
      {CollOp::AllToAll, Locality::Inter, "nvlink", 0, 32 * kMiB, 9.0e9},
      {CollOp::AllToAll, Locality::Inter, "nvswitch", 0, 64 * kKiB, 1.5e9},
      {CollOp::AllToAll, Locality::Inter, "nvswitch", 0, 64 * kMiB, 40.0e9},
  };
  return BandwidthProfile::ingest(records);
}

UtilizationProfile default_utilization_profile() {
  std::vector<UtilizationRecord> records;
  const double sizes[] = {0.6e9, 1.2e9, 2.4e9, 4.8e9};
  const std::int64_t batches[] = {1, 2, 3, 4, 6, 8, 12, 16};
  const double base[] = {0.28, 0.30, 0.33, 0.35};
  const double gain[] = {0.00, 0.07, 0.12, 0.15, 0.19, 0.21, 0.23, 0.24};
  for (std::size_t i = 0; i < std::size(sizes); ++i)
    for (std::size_t j = 0; j < std::size(batches); ++j)
      records.push_back({sizes[i], batches[j], base[i] + gain[j]});
  return UtilizationProfile::ingest(records);
}

}  // namespace traincast
