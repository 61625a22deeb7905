// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line surface: prediction, heatmap emission, On-Off timelines,
// pipeline simulation, configuration tuning and profile ingestion.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "traincast/config.hpp"
#include "traincast/errors.hpp"
#include "traincast/io.hpp"
#include "traincast/moe.hpp"
#include "traincast/predict.hpp"
#include "traincast/profiles.hpp"
#include "traincast/schedule_sim.hpp"
#include "traincast/traffic.hpp"
#include "traincast/tuner.hpp"
#include "traincast/version.hpp"

namespace {

namespace fs = std::filesystem;
using namespace traincast;

struct CliOptions {
  std::string config_path;
  std::vector<std::string> profile_paths;
  std::string out_dir = ".";
  bool strict_mapping = false;
  bool no_recompute = false;
  bool no_default_profiles = false;
  bool zero_comm = false;
  std::int64_t interleave = 0;  // 0: keep the config file's value
  std::int64_t k_active = 2;
  double token_budget = 0.0;
  double rent_rate = 0.0;
  double gpu_price = 0.0;
  std::string format = "txt";
  bool cross_product = false;
  std::vector<std::int64_t> dp_sweep;
  std::string dp_range;
  std::vector<std::int64_t> micro_batches;
};

ProfileBundle load_profiles(const CliOptions& opts) {
  ProfileBundle bundle;
  if (!opts.no_default_profiles) {
    bundle.bandwidth = default_bandwidth_profile();
    bundle.utilization = default_utilization_profile();
  }
  for (const std::string& path : opts.profile_paths)
    load_profile_file(path, bundle);
  return bundle;
}

ScenarioConfig load_scenario(const CliOptions& opts) {
  if (opts.config_path.empty())
    fail(Errc::UsageError, "--config is required for this subcommand");
  ScenarioConfig config = load_config_file(opts.config_path);
  if (opts.interleave > 0) config.parallel.interleave = opts.interleave;
  return config;
}

PredictOptions predict_options(const CliOptions& opts) {
  PredictOptions options;
  options.cost.recompute = !opts.no_recompute;
  options.cost.k_active = opts.k_active;
  options.mapping.strict = opts.strict_mapping;
  return options;
}

TuneRequest make_request(const CliOptions& opts, const ScenarioConfig& config,
                         const ProfileBundle& profiles) {
  TuneRequest request;
  request.model = config.model;
  request.platform = config.platform;
  request.base = config.parallel;
  request.bandwidth = profiles.bandwidth;
  request.utilization = profiles.utilization;
  request.options = predict_options(opts);
  request.micro_batch_candidates = opts.micro_batches;
  request.token_budget = opts.token_budget;
  request.rent_rate = opts.rent_rate;
  request.gpu_price = opts.gpu_price;
  return request;
}

std::vector<std::int64_t> resolve_dp_sweep(const CliOptions& opts) {
  std::vector<std::int64_t> sweep = opts.dp_sweep;
  if (!opts.dp_range.empty()) {
    const auto colon = opts.dp_range.find(':');
    if (colon == std::string::npos)
      fail(Errc::UsageError, "--dp-range expects MIN:MAX");
    const std::int64_t lo = std::stoll(opts.dp_range.substr(0, colon));
    const std::int64_t hi = std::stoll(opts.dp_range.substr(colon + 1));
    if (lo < 1 || hi < lo) fail(Errc::UsageError, "--dp-range expects 1 <= MIN <= MAX");
    for (std::int64_t d = lo; d <= hi; ++d) sweep.push_back(d);
  }
  return sweep;
}

int cmd_predict(const CliOptions& opts) {
  const ScenarioConfig config = load_scenario(opts);
  const ProfileBundle profiles = load_profiles(opts);
  const Prediction prediction =
      predict_iteration(config, profiles.bandwidth, profiles.utilization,
                        predict_options(opts));
  const Provenance prov = make_provenance(config);
  const std::string text = breakdown_text(config, prediction, prov);
  write_file(fs::path(opts.out_dir) / "predict.txt", text);
  write_file(fs::path(opts.out_dir) / "predict.json",
             breakdown_json(config, prediction, prov));
  std::fputs(text.c_str(), stdout);
  return 0;
}

int cmd_heatmap(const CliOptions& opts) {
  const ScenarioConfig config = load_scenario(opts);
  const DerivedParams derived =
      validate(config.model, config.parallel, config.platform);
  const RankMapping mapping =
      map_ranks(config.parallel, config.platform, {opts.strict_mapping});
  TrafficOptions traffic_options;
  traffic_options.recompute = !opts.no_recompute;
  traffic_options.k_active = opts.k_active;
  const TrafficMatrix matrix = build_traffic_matrix(
      config.model, config.parallel, derived, mapping, traffic_options);
  const Provenance prov = make_provenance(config);
  for (int c = 0; c < kTrafficClassCount; ++c) {
    const auto cls = static_cast<TrafficClass>(c);
    write_file(fs::path(opts.out_dir) /
                   (std::string(traffic_class_name(cls)) + ".csv"),
               heatmap_csv(matrix, cls, prov));
  }
  write_file(fs::path(opts.out_dir) / "heatmap.json",
             heatmap_combined_json(matrix, prov));
  std::printf("wrote %d class matrices for %lld ranks to %s\n", kTrafficClassCount,
              static_cast<long long>(matrix.n), opts.out_dir.c_str());
  return 0;
}

int cmd_timeline(const CliOptions& opts) {
  const ScenarioConfig config = load_scenario(opts);
  const ProfileBundle profiles = load_profiles(opts);
  const Prediction prediction =
      predict_iteration(config, profiles.bandwidth, profiles.utilization,
                        predict_options(opts));
  // One block per pass: per-micro-batch totals split evenly across the
  // forward and backward block.
  const Timeline timeline =
      onoff_timeline(prediction.derived, prediction.breakdown.t_comp_mb / 2.0,
                     prediction.breakdown.t_tp_mb / 2.0,
                     prediction.breakdown.t_pp_mb / 2.0);
  const Provenance prov = make_provenance(config);
  write_file(fs::path(opts.out_dir) / "timeline.csv", timeline_csv(timeline, prov));
  std::printf("wrote %zu segments (%lld blocks) to %s/timeline.csv\n",
              timeline.segments.size(), static_cast<long long>(timeline.blocks),
              opts.out_dir.c_str());
  return 0;
}

int cmd_sim(const CliOptions& opts) {
  const ScenarioConfig config = load_scenario(opts);
  const ProfileBundle profiles = load_profiles(opts);
  const Prediction prediction =
      predict_iteration(config, profiles.bandwidth, profiles.utilization,
                        predict_options(opts));
  const CostBreakdown& b = prediction.breakdown;

  SimInput input;
  input.stages = config.parallel.pp;
  input.micro_batches = prediction.derived.micro_batches;
  input.chunks = config.parallel.interleave;
  const double v = static_cast<double>(input.chunks);
  const double ratio = input.backward_ratio;
  input.fwd = b.t_comp_mb / (1.0 + ratio) / v;
  input.bwd = b.t_comp_mb * ratio / (1.0 + ratio) / v;
  if (!opts.zero_comm) {
    // 2 of the 6 AllReduces run in the forward pass, 4 with recomputation in
    // the backward pass; one hop carries half of the per-mb send+recv time.
    input.tp_fwd = b.t_tp_mb / 3.0 / v;
    input.tp_bwd = b.t_tp_mb * 2.0 / 3.0 / v;
    input.pp_hop = input.stages > 1 ? b.t_pp_mb / (2.0 * v) : 0.0;
  }
  const SimResult result = simulate_interleaved(input);

  const Provenance prov = make_provenance(config);
  write_file(fs::path(opts.out_dir) / "trace.json",
             chrome_trace_json(result, prov.comment_line()));
  const Timeline timeline = sim_timeline(result, 0, input.tp_fwd, input.tp_bwd);
  write_file(fs::path(opts.out_dir) / "sim_timeline.csv",
             timeline_csv(timeline, prov));

  const double p = static_cast<double>(input.stages);
  const double m = static_cast<double>(input.micro_batches);
  const double eq_ratio = p > 1.0 ? (p - 1.0) / ((p - 1.0 + m) * v) : 0.0;
  std::string summary = prov.comment_line() + "\n";
  char line[200];
  std::snprintf(line, sizeof(line),
                "simulated: iteration_time=%.9g s  bubble_ratio=%.9f  idle=%.9g s\n",
                result.iteration_time, result.bubble_ratio, result.stage0_idle);
  summary += line;
  std::snprintf(line, sizeof(line),
                "closed form: (p-1)/((p-1+m)*v) = %.9f   formula t_iter=%.9g s\n",
                eq_ratio, b.t_iter);
  summary += line;
  write_file(fs::path(opts.out_dir) / "sim_summary.txt", summary);
  std::fputs(summary.c_str(), stdout);
  return 0;
}

int write_tune_outputs(const CliOptions& opts, const ScenarioConfig& config,
                       const TuneReport& report, const std::string& stem,
                       bool with_curve) {
  const Provenance prov = make_provenance(config);
  const std::string text = tune_report_text(report, prov);
  write_file(fs::path(opts.out_dir) / (stem + ".txt"), text);
  write_file(fs::path(opts.out_dir) / (stem + ".json"),
             tune_report_json(report, prov));
  if (with_curve || opts.format == "csv")
    write_file(fs::path(opts.out_dir) / (stem + ".csv"),
               scale_curve_csv(report, prov));
  std::fputs(text.c_str(), stdout);
  return 0;
}

int cmd_tune_microbatch(const CliOptions& opts) {
  const ScenarioConfig config = load_scenario(opts);
  const ProfileBundle profiles = load_profiles(opts);
  const TuneReport report =
      tune_micro_batch(make_request(opts, config, profiles));
  return write_tune_outputs(opts, config, report, "tune_microbatch", false);
}

int cmd_tune_parallelism(const CliOptions& opts) {
  const ScenarioConfig config = load_scenario(opts);
  const ProfileBundle profiles = load_profiles(opts);
  const TuneReport report =
      tune_parallelism(make_request(opts, config, profiles));
  return write_tune_outputs(opts, config, report, "tune_parallelism", false);
}

int cmd_scale_analysis(const CliOptions& opts) {
  const ScenarioConfig config = load_scenario(opts);
  const ProfileBundle profiles = load_profiles(opts);
  TuneRequest request = make_request(opts, config, profiles);
  request.dp_sweep = resolve_dp_sweep(opts);
  request.layout_search_per_degree = opts.cross_product;
  if (request.dp_sweep.empty())
    fail(Errc::UsageError, "scale-analysis needs --dp-sweep or --dp-range");
  const TuneReport report = scale_analysis(request);
  return write_tune_outputs(opts, config, report, "scale_analysis", true);
}

std::string with_content_header(const std::string& body) {
  return make_content_provenance(body).comment_line() + "\n" + body;
}

int cmd_ingest_profile(const CliOptions& opts) {
  if (opts.profile_paths.empty())
    fail(Errc::UsageError, "ingest-profile needs at least one --profile");
  ProfileBundle bundle;  // ingested files only, no defaults
  for (const std::string& path : opts.profile_paths)
    load_profile_file(path, bundle);
  if (!bundle.bandwidth.empty())
    write_file(fs::path(opts.out_dir) / "bandwidth_profile.csv",
               with_content_header(bandwidth_to_csv(bundle.bandwidth)));
  if (!bundle.utilization.empty())
    write_file(fs::path(opts.out_dir) / "utilization_profile.csv",
               with_content_header(utilization_to_csv(bundle.utilization)));
  std::printf("ingested %zu bandwidth and %zu utilization records\n",
              bundle.bandwidth.size(), bundle.utilization.size());
  return 0;
}

int cmd_show_defaults(const CliOptions& opts) {
  const std::string bw =
      with_content_header(bandwidth_to_csv(default_bandwidth_profile()));
  const std::string mu =
      with_content_header(utilization_to_csv(default_utilization_profile()));
  write_file(fs::path(opts.out_dir) / "default_bandwidth.csv", bw);
  write_file(fs::path(opts.out_dir) / "default_utilization.csv", mu);
  std::fputs(bw.c_str(), stdout);
  std::fputs(mu.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"traincast: traffic, timing and tuning predictions for "
               "hybrid-parallel LLM training"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CliOptions opts;
  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config)
      cmd->add_option("--config", opts.config_path, "scenario config file (JSON)");
    cmd->add_option("--profile", opts.profile_paths,
                    "profile CSV, repeatable; later files override earlier keys");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_flag("--strict-mapping", opts.strict_mapping,
                  "reject TP groups that span machines");
    cmd->add_flag("--no-recompute", opts.no_recompute,
                  "model training without activation recomputation");
    cmd->add_flag("--no-default-profiles", opts.no_default_profiles,
                  "start from empty profiles instead of the bundled defaults");
    cmd->add_option("--interleave", opts.interleave,
                    "override the interleave factor v");
    cmd->add_option("--k-active", opts.k_active, "active experts per token")
        ->check(CLI::Range(1, 2));
    cmd->add_option("--format", opts.format, "report format")
        ->check(CLI::IsMember({"txt", "csv"}));
  };

  CLI::App* predict = app.add_subcommand("predict", "iteration-time breakdown");
  add_common(predict, true);
  CLI::App* heatmap = app.add_subcommand("heatmap", "per-class traffic matrices");
  add_common(heatmap, true);
  CLI::App* timeline = app.add_subcommand("timeline", "On-Off transmission timeline");
  add_common(timeline, true);
  CLI::App* sim = app.add_subcommand("sim", "discrete-event pipeline simulation");
  add_common(sim, true);
  sim->add_flag("--zero-comm", opts.zero_comm,
                "simulate the schedule with free communication");
  CLI::App* tune_mb = app.add_subcommand("tune-microbatch",
                                         "search micro-batch sizes at fixed degrees");
  add_common(tune_mb, true);
  tune_mb->add_option("--micro-batch", opts.micro_batches,
                      "explicit candidate list (default: divisors of g/d)");
  CLI::App* tune_par = app.add_subcommand("tune-parallelism",
                                          "search (t,p,d) layouts at fixed GPU count");
  add_common(tune_par, true);
  CLI::App* scale = app.add_subcommand("scale-analysis",
                                       "sweep the data-parallel degree");
  add_common(scale, true);
  scale->add_option("--dp-sweep", opts.dp_sweep, "explicit dp degrees");
  scale->add_option("--dp-range", opts.dp_range, "dp range MIN:MAX");
  scale->add_option("--token-budget", opts.token_budget, "training tokens");
  scale->add_option("--rent-rate", opts.rent_rate, "currency per GPU-hour");
  scale->add_option("--gpu-price", opts.gpu_price, "currency per GPU");
  scale->add_flag("--cross-product", opts.cross_product,
                  "re-search the (t,p) split at every swept degree");
  CLI::App* ingest = app.add_subcommand("ingest-profile",
                                        "validate and normalize profile CSVs");
  add_common(ingest, false);
  CLI::App* defaults = app.add_subcommand("show-defaults",
                                          "emit the bundled default profiles");
  add_common(defaults, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (predict->parsed()) return cmd_predict(opts);
    if (heatmap->parsed()) return cmd_heatmap(opts);
    if (timeline->parsed()) return cmd_timeline(opts);
    if (sim->parsed()) return cmd_sim(opts);
    if (tune_mb->parsed()) return cmd_tune_microbatch(opts);
    if (tune_par->parsed()) return cmd_tune_parallelism(opts);
    if (scale->parsed()) return cmd_scale_analysis(opts);
    if (ingest->parsed()) return cmd_ingest_profile(opts);
    if (defaults->parsed()) return cmd_show_defaults(opts);
  } catch (const traincast::Error& e) {
    if (e.code() == Errc::UsageError) {
      std::fprintf(stderr, "usage error: %s\n", e.what());
      return 2;
    }
    std::fprintf(stderr, "error: %s: %s\n", e.name(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
