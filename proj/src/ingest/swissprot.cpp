// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "ingest/swissprot.hpp"

#include <cctype>

#include "aa/property_table.hpp"
#include "core/error.hpp"

namespace cmadiff {

namespace {

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Splits on `;`, trims each piece, drops empties and a trailing `.`.
std::vector<std::string> split_semicolon_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    std::string item = strip(cur);
    if (!item.empty() && item.back() == '.') item.pop_back();
    item = strip(item);
    if (!item.empty()) out.push_back(item);
    cur.clear();
  };
  for (char c : text) {
    if (c == ';') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

}  // namespace

std::optional<ProteinRecord> SwissProtParser::next() {
  std::string line;
  ProteinRecord rec;
  bool in_entry = false;
  bool saw_sq = false;
  size_t entry_start_line = 0;
  std::string oc_text;
  std::string kw_text;

  while (std::getline(in_, line)) {
    ++lineno_;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    if (line.rfind("//", 0) == 0 && line.find_first_not_of("/ \t") == std::string::npos) {
      if (!in_entry) continue;  // stray terminator
      if (!saw_sq || rec.sequence.empty()) {
        ++counters_.skipped_no_sequence;
        // reset and keep scanning for the next usable entry
        rec = ProteinRecord{};
        in_entry = false;
        saw_sq = false;
        entry_start_line = 0;
        oc_text.clear();
        kw_text.clear();
        continue;
      }
      rec.organism_lineage = split_semicolon_list(oc_text);
      rec.keywords = split_semicolon_list(kw_text);
      rec.function_text = strip(rec.function_text);
      rec.description = build_description(rec);
      ++counters_.parsed;
      return rec;
    }

    if (line.size() < 2) continue;
    const std::string code = line.substr(0, 2);
    const std::string payload = line.size() > 5 ? line.substr(5) : "";

    if (saw_sq && code == "  ") {
      for (char c : line) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
          rec.sequence.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        }
      }
      in_entry = true;
      continue;
    }

    if (code == "ID") {
      in_entry = true;
      if (entry_start_line == 0) entry_start_line = lineno_;
    } else if (code == "AC") {
      in_entry = true;
      if (rec.accession.empty()) {
        auto accs = split_semicolon_list(payload);
        if (!accs.empty()) rec.accession = accs.front();
      }
    } else if (code == "OC") {
      in_entry = true;
      if (!oc_text.empty()) oc_text += ' ';
      oc_text += payload;
    } else if (code == "KW") {
      in_entry = true;
      if (!kw_text.empty()) kw_text += ' ';
      kw_text += payload;
    } else if (code == "CC") {
      in_entry = true;
      const std::string body = strip(payload);
      if (body.empty()) continue;
      if (rec.function_text.empty()) {
        rec.function_text = body;
      } else if (body.rfind("-!-", 0) == 0) {
        rec.function_text += '\n';
        rec.function_text += body;
      } else {
        rec.function_text += ' ';
        rec.function_text += body;
      }
    } else if (code == "SQ") {
      in_entry = true;
      saw_sq = true;
    } else {
      // other line codes (DT, DE, OS, DR, FT, ...) are not extracted
      if (!in_entry && code != "  ") in_entry = true;
    }
    if (in_entry && entry_start_line == 0) entry_start_line = lineno_;
  }

  if (in_entry) {
    fail(ErrorCode::Parse, "truncated record starting at line " +
                               std::to_string(entry_start_line) +
                               ": input ended before the '//' terminator");
  }
  return std::nullopt;
}

std::vector<ProteinRecord> parse_swissprot_dat(std::istream& in, ParseCounters* counters) {
  SwissProtParser parser(in);
  std::vector<ProteinRecord> records;
  while (auto rec = parser.next()) records.push_back(std::move(*rec));
  if (counters) *counters = parser.counters();
  return records;
}

std::string build_description(const ProteinRecord& record) {
  std::string out;
  auto join = [](const std::vector<std::string>& items) {
    std::string s;
    for (size_t i = 0; i < items.size(); ++i) {
      if (i) s += "; ";
      s += items[i];
    }
    return s;
  };
  if (!record.organism_lineage.empty()) {
    out += "Species: " + join(record.organism_lineage) + ".";
  }
  if (!record.keywords.empty()) {
    if (!out.empty()) out += '\n';
    out += "Keyword: " + join(record.keywords) + ".";
  }
  if (!record.function_text.empty()) {
    if (!out.empty()) out += '\n';
    out += "Function: " + record.function_text;
  }
  return out;
}

std::vector<ProteinRecord> filter_records(const std::vector<ProteinRecord>& records,
                                          int min_len, int max_len, FilterCounts* counts) {
  FilterCounts local;
  std::vector<ProteinRecord> kept;
  for (const auto& rec : records) {
    const int len = static_cast<int>(rec.sequence.size());
    if (len < min_len) {
      ++local.too_short;
      continue;
    }
    if (len > max_len) {
      ++local.too_long;
      continue;
    }
    bool standard = true;
    for (char c : rec.sequence) {
      if (AminoAcidPropertyTable::row_index(c) < 0) {
        standard = false;
        break;
      }
    }
    if (!standard) {
      ++local.nonstandard;
      continue;
    }
    ++local.kept;
    kept.push_back(rec);
  }
  if (counts) *counts = local;
  return kept;
}

}  // namespace cmadiff
