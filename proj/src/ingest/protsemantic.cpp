// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "ingest/protsemantic.hpp"

#include <fstream>

#include <json.hpp>

#include "core/error.hpp"

namespace cmadiff {

using nlohmann::json;

void write_protsemantic(const std::vector<ProteinRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open output file: " + path);
  for (const auto& rec : records) {
    json j;
    j["accession"] = rec.accession;
    j["sequence"] = rec.sequence;
    j["description"] = rec.description;
    j["organism_lineage"] = rec.organism_lineage;
    j["keywords"] = rec.keywords;
    j["function_text"] = rec.function_text;
    out << j.dump() << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

std::vector<ProteinRecord> read_protsemantic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open dataset file: " + path);
  std::vector<ProteinRecord> records;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse,
           "dataset line " + std::to_string(lineno) + ": malformed record: " + e.what());
    }
    for (const char* field :
         {"accession", "sequence", "description", "organism_lineage", "keywords",
          "function_text"}) {
      if (!j.contains(field)) {
        fail(ErrorCode::Parse, "dataset line " + std::to_string(lineno) +
                                   ": missing field '" + field + "'");
      }
    }
    try {
      ProteinRecord rec;
      rec.accession = j.at("accession").get<std::string>();
      rec.sequence = j.at("sequence").get<std::string>();
      rec.description = j.at("description").get<std::string>();
      rec.organism_lineage = j.at("organism_lineage").get<std::vector<std::string>>();
      rec.keywords = j.at("keywords").get<std::vector<std::string>>();
      rec.function_text = j.at("function_text").get<std::string>();
      records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse,
           "dataset line " + std::to_string(lineno) + ": bad field type: " + e.what());
    }
  }
  return records;
}

DatasetManifest build_manifest(const std::vector<ProteinRecord>& records,
                               const std::string& source_digest, int min_len, int max_len,
                               const ParseCounters& parse_counters,
                               const FilterCounts& filter_counts) {
  DatasetManifest m;
  m.record_count = records.size();
  for (const auto& rec : records) m.length_histogram[static_cast<int>(rec.sequence.size())]++;
  m.source_digest = source_digest;
  m.min_len = min_len;
  m.max_len = max_len;
  m.skipped_no_sequence = parse_counters.skipped_no_sequence;
  m.dropped_too_short = filter_counts.too_short;
  m.dropped_too_long = filter_counts.too_long;
  m.dropped_nonstandard = filter_counts.nonstandard;
  return m;
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  json hist = json::array();
  for (const auto& [len, count] : manifest.length_histogram) {
    hist.push_back({len, count});
  }
  json j;
  j["record_count"] = manifest.record_count;
  j["length_histogram"] = hist;
  j["source_digest"] = manifest.source_digest;
  j["filter"] = {{"min_len", manifest.min_len}, {"max_len", manifest.max_len}};
  j["skipped_no_sequence"] = manifest.skipped_no_sequence;
  j["dropped_too_short"] = manifest.dropped_too_short;
  j["dropped_too_long"] = manifest.dropped_too_long;
  j["dropped_nonstandard"] = manifest.dropped_nonstandard;

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open manifest file: " + path);
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

}  // namespace cmadiff
