// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "pipeline/fasta.hpp"

#include <fstream>

#include "core/error.hpp"

namespace cmadiff {

void write_fasta(const std::vector<FastaRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot open FASTA file for writing: " + path);
  for (const auto& record : records) {
    out << '>' << record.header << '\n';
    for (size_t pos = 0; pos < record.sequence.size(); pos += 60) {
      out << record.sequence.substr(pos, 60) << '\n';
    }
  }
  if (!out) fail(ErrorCode::Io, "write to FASTA file failed: " + path);
}

std::vector<FastaRecord> read_fasta(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open FASTA file: " + path);
  std::vector<FastaRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '>') {
      records.push_back(FastaRecord{line.substr(1), ""});
    } else {
      if (records.empty()) {
        fail(ErrorCode::Parse,
             path + ":" + std::to_string(line_no) + ": sequence data before any '>' header");
      }
      records.back().sequence += line;
    }
  }
  return records;
}

}  // namespace cmadiff
