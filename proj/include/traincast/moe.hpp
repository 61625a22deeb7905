// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "traincast/types.hpp"

namespace traincast {

/// e x e byte matrix of one AllToAll operation, row = sender, col = receiver.
struct AllToAllHeatmap {
  std::int64_t e = 0;
  std::vector<double> bytes;  // row-major, e*e entries, all >= 0

  double& at(std::int64_t row, std::int64_t col) {
    return bytes[static_cast<std::size_t>(row * e + col)];
  }
  double at(std::int64_t row, std::int64_t col) const {
    return bytes[static_cast<std::size_t>(row * e + col)];
  }
  static AllToAllHeatmap zeros(std::int64_t e) {
    return {e, std::vector<double>(static_cast<std::size_t>(e * e), 0.0)};
  }
};

AllToAllHeatmap transpose(const AllToAllHeatmap& m);

struct AllToAllSequence {
  AllToAllHeatmap fw2;  // transpose of the first forward AllToAll
  AllToAllHeatmap bw1;  // identical to the first forward AllToAll
  AllToAllHeatmap bw2;  // transpose again
};

/// The four AllToAlls of an expert layer are either identical or transposed,
/// so the first forward heatmap determines the remaining three.
/// Errors: NonSquare when the input is not a well-formed e x e matrix.
AllToAllSequence predict_alltoall_sequence(const AllToAllHeatmap& first_fw);

/// Uniform-gating expectation: every entry (diagonal included) carries
/// k_active * 2gsh / e^2 bytes, so each row scatters k_active * 2gsh / e.
AllToAllHeatmap expected_alltoall_matrix(const ModelSpec& model, std::int64_t e,
                                         std::int64_t k_active);

struct UniformityMetrics {
  double mean = 0.0;      // bytes
  double variance = 0.0;  // bytes^2, population variance over all e^2 pairs
};

UniformityMetrics uniformity_metrics(const AllToAllHeatmap& m);

}  // namespace traincast
