// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#include "traincast/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "traincast/errors.hpp"
#include "traincast/version.hpp"

namespace traincast {

namespace {

using json = nlohmann::ordered_json;

json breakdown_to_json(const CostBreakdown& b) {
  return json{{"t_comp_s", b.t_comp},
              {"t_tp_s", b.t_tp},
              {"t_pp_s", b.t_pp},
              {"t_dp_s", b.t_dp},
              {"t_ata_s", b.t_ata},
              {"t_bubble_s", b.t_bubble},
              {"t_iter_s", b.t_iter},
              {"t_comp_mb_s", b.t_comp_mb},
              {"t_tp_mb_s", b.t_tp_mb},
              {"t_pp_mb_s", b.t_pp_mb},
              {"flops_per_mb", b.flops_per_mb},
              {"r_bubble", b.r_bubble},
              {"r_bubble_approx", b.r_bubble_approx},
              {"r_comm", b.r_comm}};
}

json prediction_to_json(const Prediction& p) {
  return json{
      {"derived",
       {{"micro_batches", p.derived.micro_batches},
        {"layers_per_stage", p.derived.layers_per_stage},
        {"params_per_gpu", p.derived.params_per_gpu}}},
      {"rates",
       {{"c_tp_bytes_per_s", p.rates.bw.c_tp},
        {"c_pp_bytes_per_s", p.rates.bw.c_pp},
        {"c_dp_bytes_per_s", p.rates.bw.c_dp},
        {"c_ata_bytes_per_s", p.rates.bw.c_ata},
        {"mu", p.rates.mu},
        {"tp_locality", locality_name(p.rates.tp_locality)},
        {"pp_locality", locality_name(p.rates.pp_locality)},
        {"dp_locality", locality_name(p.rates.dp_locality)},
        {"ata_locality", locality_name(p.rates.ata_locality)}}},
      {"breakdown", breakdown_to_json(p.breakdown)},
      {"throughput_flops", p.throughput_flops},
      {"memory_bytes_per_gpu", p.memory_bytes},
      {"memory_feasible", p.memory_feasible},
      {"inter_machine_tp", p.inter_machine_tp}};
}

json candidate_to_json(const Candidate& c, bool scale_fields) {
  json out{{"parallel",
            {{"tp", c.parallel.tp},
             {"pp", c.parallel.pp},
             {"dp", c.parallel.dp},
             {"ep", c.parallel.ep},
             {"micro_batch", c.parallel.micro_batch},
             {"interleave", c.parallel.interleave}}},
           {"machines", c.platform.machines},
           {"gpus", c.parallel.total_gpus()},
           {"feasible", c.feasible}};
  if (!c.feasible) {
    out["exclusion_reason"] = c.exclusion_reason;
    return out;
  }
  out["prediction"] = prediction_to_json(c.prediction);
  if (scale_fields) {
    out["scaling_factor"] = c.scaling_factor;
    out["iterations"] = c.iterations;
    out["training_days"] = c.training_days;
    out["rent_cost"] = c.rent_cost;
    out["buy_cost"] = c.buy_cost;
  }
  return out;
}

bool has_scale_fields(const TuneReport& report) {
  for (const Candidate& c : report.ranked)
    if (c.scaling_factor != 0.0 || c.training_days != 0.0) return true;
  return false;
}

}  // namespace

std::string Provenance::comment_line() const {
  return "# traincast " + version + " input=" + digest;
}

Provenance make_provenance(const ScenarioConfig& config) {
  return Provenance{kVersion, config_digest(config)};
}

Provenance make_content_provenance(const std::string& body) {
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char c : body) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char digest[17];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(hash));
  return Provenance{kVersion, digest};
}

std::string format_double(double value) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
    double back = 0.0;
    std::sscanf(buf, "%lg", &back);
    if (back == value) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string heatmap_csv(const TrafficMatrix& matrix, TrafficClass cls,
                        const Provenance& prov) {
  std::ostringstream out;
  out << prov.comment_line() << " class=" << traffic_class_name(cls)
      << " unit=bytes\n";
  out << "rank";
  for (std::int64_t c = 0; c < matrix.n; ++c) out << ',' << c;
  out << '\n';
  std::vector<std::uint64_t> row(static_cast<std::size_t>(matrix.n));
  for (std::int64_t r = 0; r < matrix.n; ++r) {
    std::fill(row.begin(), row.end(), 0);
    for (const TrafficEdge& e : matrix.edges(cls))
      if (e.src == r) row[static_cast<std::size_t>(e.dst)] = e.bytes;
    out << r;
    for (std::int64_t c = 0; c < matrix.n; ++c)
      out << ',' << row[static_cast<std::size_t>(c)];
    out << '\n';
  }
  return out.str();
}

std::string heatmap_combined_json(const TrafficMatrix& matrix, const Provenance& prov) {
  json doc;
  doc["provenance"] = {{"tool", "traincast"},
                       {"version", prov.version},
                       {"input", prov.digest}};
  doc["n"] = matrix.n;
  json classes;
  for (int c = 0; c < kTrafficClassCount; ++c) {
    const auto cls = static_cast<TrafficClass>(c);
    json edges = json::array();
    for (const TrafficEdge& e : matrix.edges(cls))
      edges.push_back({e.src, e.dst, e.bytes});
    classes[traffic_class_name(cls)] = std::move(edges);
  }
  doc["classes"] = std::move(classes);
  return doc.dump(2);
}

std::string timeline_csv(const Timeline& timeline, const Provenance& prov) {
  std::ostringstream out;
  out << prov.comment_line() << " blocks=" << timeline.blocks << '\n';
  out << "start_s,end_s,kind\n";
  for (const TimelineSegment& seg : timeline.segments) {
    out << format_double(seg.start_s) << ',' << format_double(seg.end_s) << ','
        << timeline_kind_name(seg.kind) << '\n';
  }
  return out.str();
}

std::string breakdown_text(const ScenarioConfig& config, const Prediction& prediction,
                           const Provenance& prov) {
  const CostBreakdown& b = prediction.breakdown;
  std::ostringstream out;
  out << prov.comment_line() << '\n';
  char line[160];
  auto row = [&](const char* name, double seconds, double share) {
    std::snprintf(line, sizeof(line), "  %-10s %14.6f s  %6.2f %%\n", name, seconds,
                  100.0 * share);
    out << line;
  };
  out << "iteration prediction\n";
  out << "  model: " << model_kind_name(config.model.kind)
      << "  N=" << format_double(config.model.param_count)
      << "  l=" << config.model.layers << "  h=" << config.model.hidden
      << "  s=" << config.model.seq_len << "  g=" << config.model.global_batch
      << '\n';
  out << "  parallel: t=" << config.parallel.tp << " p=" << config.parallel.pp
      << " d=" << config.parallel.dp << " e=" << config.parallel.ep
      << " b=" << config.parallel.micro_batch << " v=" << config.parallel.interleave
      << "  m=" << prediction.derived.micro_batches << '\n';
  std::snprintf(line, sizeof(line),
                "  rates: mu=%.4f  c_tp=%.4g  c_pp=%.4g  c_dp=%.4g  c_ata=%.4g\n",
                prediction.rates.mu, prediction.rates.bw.c_tp,
                prediction.rates.bw.c_pp, prediction.rates.bw.c_dp,
                prediction.rates.bw.c_ata);
  out << line;
  const double iter = b.t_iter > 0.0 ? b.t_iter : 1.0;
  row("comp", b.t_comp, b.t_comp / iter);
  row("tp", b.t_tp, b.t_tp / iter);
  row("pp", b.t_pp, b.t_pp / iter);
  row("dp", b.t_dp, b.t_dp / iter);
  if (config.model.is_moe()) row("alltoall", b.t_ata, b.t_ata / iter);
  row("bubble", b.t_bubble, b.t_bubble / iter);
  std::snprintf(line, sizeof(line), "  %-10s %14.6f s\n", "iteration", b.t_iter);
  out << line;
  std::snprintf(line, sizeof(line),
                "  per micro-batch: comp=%.6g s  tp=%.6g s  pp=%.6g s  "
                "flops=%.6g\n",
                b.t_comp_mb, b.t_tp_mb, b.t_pp_mb, b.flops_per_mb);
  out << line;
  std::snprintf(line, sizeof(line),
                "  r_comm=%.4f  r_bubble=%.4f  r_bubble_approx=%.4f\n", b.r_comm,
                b.r_bubble, b.r_bubble_approx);
  out << line;
  std::snprintf(line, sizeof(line), "  throughput=%.6g FLOP/s  mem/gpu=%.6g bytes%s\n",
                prediction.throughput_flops, prediction.memory_bytes,
                prediction.memory_feasible ? "" : "  (exceeds GPU memory)");
  out << line;
  return out.str();
}

std::string breakdown_json(const ScenarioConfig& config, const Prediction& prediction,
                           const Provenance& prov) {
  json doc;
  doc["provenance"] = {{"tool", "traincast"},
                       {"version", prov.version},
                       {"input", prov.digest}};
  doc["config"] = json::parse(config_to_json(config));
  doc["prediction"] = prediction_to_json(prediction);
  return doc.dump(2);
}

std::string tune_report_text(const TuneReport& report, const Provenance& prov) {
  std::ostringstream out;
  out << prov.comment_line() << '\n';
  out << "rank  t   p   d   b    v   t_iter_s       throughput_flops  notes\n";
  char line[200];
  int rank = 1;
  for (const Candidate& c : report.ranked) {
    const char* note = rank == 1 ? "best" : "";
    std::snprintf(line, sizeof(line), "%-5d %-3lld %-3lld %-3lld %-4lld %-3lld %-14.6f %-17.6g %s\n",
                  rank, static_cast<long long>(c.parallel.tp),
                  static_cast<long long>(c.parallel.pp),
                  static_cast<long long>(c.parallel.dp),
                  static_cast<long long>(c.parallel.micro_batch),
                  static_cast<long long>(c.parallel.interleave),
                  c.prediction.breakdown.t_iter, c.prediction.throughput_flops,
                  note);
    out << line;
    ++rank;
  }
  for (const Candidate& c : report.excluded) {
    std::snprintf(line, sizeof(line), "-     %-3lld %-3lld %-3lld %-4lld %-3lld excluded: %s\n",
                  static_cast<long long>(c.parallel.tp),
                  static_cast<long long>(c.parallel.pp),
                  static_cast<long long>(c.parallel.dp),
                  static_cast<long long>(c.parallel.micro_batch),
                  static_cast<long long>(c.parallel.interleave),
                  c.exclusion_reason.c_str());
    out << line;
  }
  return out.str();
}

std::string tune_report_json(const TuneReport& report, const Provenance& prov) {
  const bool scale_fields = has_scale_fields(report);
  json doc;
  doc["provenance"] = {{"tool", "traincast"},
                       {"version", prov.version},
                       {"input", prov.digest}};
  json ranked = json::array();
  for (const Candidate& c : report.ranked)
    ranked.push_back(candidate_to_json(c, scale_fields));
  json excluded = json::array();
  for (const Candidate& c : report.excluded)
    excluded.push_back(candidate_to_json(c, scale_fields));
  doc["ranked"] = std::move(ranked);
  doc["excluded"] = std::move(excluded);
  return doc.dump(2);
}

std::string scale_curve_csv(const TuneReport& report, const Provenance& prov) {
  // Rows in dp order, not rank order, to match how the curve is plotted.
  std::vector<const Candidate*> rows;
  for (const Candidate& c : report.ranked) rows.push_back(&c);
  std::sort(rows.begin(), rows.end(), [](const Candidate* a, const Candidate* b) {
    return a->parallel.dp < b->parallel.dp;
  });
  std::ostringstream out;
  out << prov.comment_line() << '\n';
  out << "d,scaling_factor,days,rent_cost,buy_cost\n";
  for (const Candidate* c : rows) {
    out << c->parallel.dp << ',' << format_double(c->scaling_factor) << ','
        << format_double(c->training_days) << ',' << format_double(c->rent_cost)
        << ',' << format_double(c->buy_cost) << '\n';
  }
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(Errc::IoError, "short write to " + path.string());
}

}  // namespace traincast
