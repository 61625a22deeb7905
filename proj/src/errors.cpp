// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#include "traincast/errors.hpp"

namespace traincast {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::NonDivisibleBatch: return "NonDivisibleBatch";
    case Errc::NonDivisibleLayers: return "NonDivisibleLayers";
    case Errc::NonDivisibleExpertGroups: return "NonDivisibleExpertGroups";
    case Errc::GpuCountMismatch: return "GpuCountMismatch";
    case Errc::UnmappableTpGroup: return "UnmappableTpGroup";
    case Errc::NonSquare: return "NonSquare";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::NonPositiveBandwidth: return "NonPositiveBandwidth";
    case Errc::MissingProfileKey: return "MissingProfileKey";
    case Errc::EmptyProfile: return "EmptyProfile";
    case Errc::NotMoeModel: return "NotMoeModel";
    case Errc::NoFeasibleCandidate: return "NoFeasibleCandidate";
    case Errc::UsageError: return "UsageError";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace traincast
