// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "traincast/config.hpp"
#include "traincast/predict.hpp"
#include "traincast/traffic.hpp"
#include "traincast/tuner.hpp"

namespace traincast {

/// Every output file starts with a version + input-digest header so results
/// can be traced back to their inputs.
struct Provenance {
  std::string version;
  std::string digest;
  std::string comment_line() const;  // "# traincast <version> input=<digest>"
};

Provenance make_provenance(const ScenarioConfig& config);
/// For outputs derived from data rather than a scenario (profile exports):
/// the digest covers the content body itself.
Provenance make_content_provenance(const std::string& body);

std::string format_double(double value);  // shortest round-trip decimal

std::string heatmap_csv(const TrafficMatrix& matrix, TrafficClass cls,
                        const Provenance& prov);
std::string heatmap_combined_json(const TrafficMatrix& matrix, const Provenance& prov);
std::string timeline_csv(const Timeline& timeline, const Provenance& prov);

std::string breakdown_text(const ScenarioConfig& config, const Prediction& prediction,
                           const Provenance& prov);
std::string breakdown_json(const ScenarioConfig& config, const Prediction& prediction,
                           const Provenance& prov);

std::string tune_report_text(const TuneReport& report, const Provenance& prov);
std::string tune_report_json(const TuneReport& report, const Provenance& prov);
/// (d, scaling_factor, days, rent_cost, buy_cost) rows in sweep order.
std::string scale_curve_csv(const TuneReport& report, const Provenance& prov);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace traincast
