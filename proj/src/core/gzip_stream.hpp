// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <istream>
#include <memory>
#include <string>

namespace cmadiff {

// Opens `path` for reading. Files starting with the gzip magic bytes are
// decompressed on the fly; anything else is read as-is.
std::unique_ptr<std::istream> open_maybe_gzip(const std::string& path);

}  // namespace cmadiff
