// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cmadiff {

// SHA-256 hex digest of a byte string.
std::string sha256_hex(std::string_view data);

// Streaming SHA-256 hex digest of a file's contents.
std::string sha256_file_hex(const std::string& path);

// FNV-1a 64-bit, used for token hashing and derived random streams.
inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace cmadiff
