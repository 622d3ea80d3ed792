// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace cmadiff {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cmadiff
