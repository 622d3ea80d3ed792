// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "ad/graph.hpp"

namespace cmadiff {

// Single-file model archive: magic, format version, model kind, a JSON
// snapshot of the config the arrays were built for, and named float64
// arrays. Readers reject unknown versions; model loaders compare the config
// snapshot against their own and name the mismatching field.
struct Checkpoint {
  std::string kind;         // "cvae" | "aligner" | "diffusion"
  std::string config_json;
  std::map<std::string, ad::Mat> arrays;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Fails unless the checkpoint's kind matches.
Checkpoint load_checkpoint(const std::string& path, const std::string& expected_kind);

}  // namespace cmadiff
