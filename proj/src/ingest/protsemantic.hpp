// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "ingest/swissprot.hpp"

namespace cmadiff {

struct DatasetManifest {
  size_t record_count = 0;
  std::map<int, size_t> length_histogram;  // sequence length -> count
  std::string source_digest;               // sha256 of the input file, hex
  int min_len = 0;
  int max_len = 0;
  size_t skipped_no_sequence = 0;
  size_t dropped_too_short = 0;
  size_t dropped_too_long = 0;
  size_t dropped_nonstandard = 0;
};

// Line-delimited JSON, one record per line, keys sorted; read(write(x)) == x.
void write_protsemantic(const std::vector<ProteinRecord>& records, const std::string& path);
std::vector<ProteinRecord> read_protsemantic(const std::string& path);

DatasetManifest build_manifest(const std::vector<ProteinRecord>& records,
                               const std::string& source_digest, int min_len, int max_len,
                               const ParseCounters& parse_counters,
                               const FilterCounts& filter_counts);

void write_manifest(const DatasetManifest& manifest, const std::string& path);

}  // namespace cmadiff
