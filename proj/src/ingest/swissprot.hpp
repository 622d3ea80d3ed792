// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace cmadiff {

struct ProteinRecord {
  std::string accession;
  std::string sequence;
  std::vector<std::string> organism_lineage;  // OC taxa, in file order
  std::vector<std::string> keywords;          // KW entries
  std::string function_text;                  // CC payload, topic markers kept
  std::string description;                    // built from the fields above
};

struct ParseCounters {
  size_t parsed = 0;
  size_t skipped_no_sequence = 0;  // entries without a usable SQ block
};

// Streaming reader for UniProtKB/Swiss-Prot flat files. Entries end at a
// `//` line; a final entry cut off before its terminator is an error that
// names the line where the entry began.
class SwissProtParser {
 public:
  explicit SwissProtParser(std::istream& in) : in_(in) {}

  // Returns the next record, or nullopt at end of input. Entries missing a
  // sequence are skipped and counted, not returned.
  std::optional<ProteinRecord> next();

  const ParseCounters& counters() const { return counters_; }

 private:
  std::istream& in_;
  size_t lineno_ = 0;
  ParseCounters counters_;
};

std::vector<ProteinRecord> parse_swissprot_dat(std::istream& in,
                                               ParseCounters* counters = nullptr);

// Labeled sections in fixed order, empty sections omitted:
//   Species: <lineage joined by "; ">.
//   Keyword: <keywords joined by "; ">.
//   Function: <function text verbatim>
std::string build_description(const ProteinRecord& record);

struct FilterCounts {
  size_t kept = 0;
  size_t too_short = 0;
  size_t too_long = 0;
  size_t nonstandard = 0;  // letters outside the 20-letter alphabet
};

// Keeps records with length in [min_len, max_len] and a fully-standard
// alphabet; rejections are tallied by the first failing reason.
std::vector<ProteinRecord> filter_records(const std::vector<ProteinRecord>& records,
                                          int min_len, int max_len,
                                          FilterCounts* counts = nullptr);

}  // namespace cmadiff
