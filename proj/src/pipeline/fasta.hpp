// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace cmadiff {

struct FastaRecord {
  std::string header;  // without the leading '>'
  std::string sequence;
};

// Standard FASTA with 60-column body wrapping.
void write_fasta(const std::vector<FastaRecord>& records, const std::string& path);

std::vector<FastaRecord> read_fasta(const std::string& path);

}  // namespace cmadiff
