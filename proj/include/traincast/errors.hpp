// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace traincast {

// Every recoverable failure in the toolkit maps to one of these codes. The
// CLI prints the code name and exits 1, so names are part of the interface.
enum class Errc {
  InvalidSpec,
  NonDivisibleBatch,
  NonDivisibleLayers,
  NonDivisibleExpertGroups,
  GpuCountMismatch,
  UnmappableTpGroup,
  NonSquare,
  MalformedRow,
  NonPositiveBandwidth,
  MissingProfileKey,
  EmptyProfile,
  NotMoeModel,
  NoFeasibleCandidate,
  UsageError,
  IoError,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }
  const char* name() const noexcept { return errc_name(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace traincast
