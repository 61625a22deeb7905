// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace traincast {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace traincast
