// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#include "traincast/moe.hpp"

#include <string>

#include "traincast/errors.hpp"

namespace traincast {

namespace {

void check_square(const AllToAllHeatmap& m) {
  if (m.e < 1 || m.bytes.size() != static_cast<std::size_t>(m.e * m.e))
    fail(Errc::NonSquare, "heatmap must be a square e x e matrix, got e=" +
                              std::to_string(m.e) + " with " +
                              std::to_string(m.bytes.size()) + " entries");
}

}  // namespace

AllToAllHeatmap transpose(const AllToAllHeatmap& m) {
  check_square(m);
  AllToAllHeatmap out = AllToAllHeatmap::zeros(m.e);
  for (std::int64_t r = 0; r < m.e; ++r)
    for (std::int64_t c = 0; c < m.e; ++c) out.at(c, r) = m.at(r, c);
  return out;
}

AllToAllSequence predict_alltoall_sequence(const AllToAllHeatmap& first_fw) {
  check_square(first_fw);
  AllToAllSequence seq;
  seq.fw2 = transpose(first_fw);
  seq.bw1 = first_fw;
  seq.bw2 = seq.fw2;
  return seq;
}

AllToAllHeatmap expected_alltoall_matrix(const ModelSpec& model, std::int64_t e,
                                         std::int64_t k_active) {
  if (e < 1) fail(Errc::InvalidSpec, "expert degree must be >= 1");
  if (k_active < 1 || k_active > model.moe_top_k_max)
    fail(Errc::InvalidSpec, "k_active must be in [1, moe_top_k_max]");
  const double total_payload = static_cast<double>(k_active) *
                               static_cast<double>(model.precision_bytes) *
                               static_cast<double>(model.global_batch) *
                               static_cast<double>(model.seq_len) *
                               static_cast<double>(model.hidden);
  const double per_pair = total_payload / (static_cast<double>(e) * static_cast<double>(e));
  AllToAllHeatmap out = AllToAllHeatmap::zeros(e);
  for (double& entry : out.bytes) entry = per_pair;
  return out;
}

UniformityMetrics uniformity_metrics(const AllToAllHeatmap& m) {
  check_square(m);
  const double count = static_cast<double>(m.bytes.size());
  UniformityMetrics metrics;
  for (double v : m.bytes) metrics.mean += v;
  metrics.mean /= count;
  for (double v : m.bytes) {
    const double diff = v - metrics.mean;
    metrics.variance += diff * diff;
  }
  metrics.variance /= count;
  return metrics;
}

}  // namespace traincast
