// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace posekit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace posekit
