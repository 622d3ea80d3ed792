// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "aa/property_table.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"
#include "ingest/protsemantic.hpp"
#include "ingest/swissprot.hpp"

using namespace cmadiff;

namespace {

const char* kTwoEntryFixture =
    "ID   TEST1_HUMAN             Reviewed;          12 AA.\n"
    "AC   P11111; Q99999;\n"
    "OC   Eukaryota; Metazoa.\n"
    "KW   Toxin.\n"
    "CC   -!- FUNCTION: Binds X\n"
    "SQ   SEQUENCE   12 AA;  999 MW;  0123456789ABCDEF CRC64;\n"
    "     MKTAYIAKQR DL\n"
    "//\n"
    "ID   TEST2_HUMAN             Reviewed;          6 AA.\n"
    "AC   P22222;\n"
    "OC   Bacteria.\n"
    "SQ   SEQUENCE   6 AA;  700 MW;  FEDCBA9876543210 CRC64;\n"
    "     ACDEFG\n"
    "//\n";

}  // namespace

TEST_CASE("two-entry fixture parses with correct accessions") {
  std::istringstream in(kTwoEntryFixture);
  ParseCounters counters;
  const auto records = parse_swissprot_dat(in, &counters);
  REQUIRE(records.size() == 2);
  CHECK(counters.parsed == 2);
  CHECK(records[0].accession == "P11111");
  CHECK(records[1].accession == "P22222");
  CHECK(records[0].sequence == "MKTAYIAKQRDL");
  CHECK(records[1].sequence == "ACDEFG");
}

TEST_CASE("multi-line SQ blocks concatenate") {
  std::string entry = "ID   LONG_TEST\nAC   P00001;\nSQ   SEQUENCE   180 AA;\n";
  std::string line60;
  for (int chunk = 0; chunk < 6; ++chunk) line60 += " ACDEFGHIKL";
  for (int i = 0; i < 3; ++i) entry += "    " + line60 + "\n";
  entry += "//\n";
  std::istringstream in(entry);
  const auto records = parse_swissprot_dat(in);
  REQUIRE(records.size() == 1);
  CHECK(records[0].sequence.size() == 180);
}

TEST_CASE("entry without CC lines omits the Function section") {
  std::istringstream in(kTwoEntryFixture);
  const auto records = parse_swissprot_dat(in);
  REQUIRE(records.size() == 2);
  CHECK(records[1].function_text.empty());
  CHECK(records[1].description.find("Function:") == std::string::npos);
  CHECK(records[1].description.find("Species: Bacteria.") != std::string::npos);
}

TEST_CASE("description template matches the documented section layout") {
  ProteinRecord record;
  record.organism_lineage = {"Eukaryota", "Metazoa"};
  record.keywords = {"Toxin"};
  record.function_text = "Binds X";
  CHECK(build_description(record) ==
        "Species: Eukaryota; Metazoa.\nKeyword: Toxin.\nFunction: Binds X");
  CHECK(build_description(ProteinRecord{}).empty());
}

TEST_CASE("entries missing a sequence are skipped and counted") {
  std::istringstream in(
      "ID   NOSEQ_TEST\nAC   P33333;\n//\n"
      "ID   OK_TEST\nAC   P44444;\nSQ   SEQUENCE   3 AA;\n     ACD\n//\n");
  ParseCounters counters;
  const auto records = parse_swissprot_dat(in, &counters);
  REQUIRE(records.size() == 1);
  CHECK(records[0].accession == "P44444");
  CHECK(counters.skipped_no_sequence == 1);
}

TEST_CASE("truncated final entry is an error naming the entry start line") {
  std::istringstream in("ID   CUT_TEST\nAC   P55555;\nSQ   SEQUENCE   3 AA;\n     ACD\n");
  CHECK_THROWS_WITH_AS(parse_swissprot_dat(in), doctest::Contains("line 1"), Error);
}

TEST_CASE("filter honors inclusive bounds and the standard alphabet") {
  std::vector<ProteinRecord> records(4);
  records[0].sequence = std::string(9, 'A');     // too short
  records[1].sequence = std::string(128, 'C');   // at the inclusive upper bound
  records[2].sequence = std::string(129, 'D');   // too long
  records[3].sequence = "ACDEFGHIKXL";           // non-standard letter
  FilterCounts counts;
  const auto kept = filter_records(records, 10, 128, &counts);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].sequence[0] == 'C');
  CHECK(counts.kept == 1);
  CHECK(counts.too_short == 1);
  CHECK(counts.too_long == 1);
  CHECK(counts.nonstandard == 1);
  // length 10 is kept too (inclusive lower bound)
  records[0].sequence = std::string(10, 'A');
  CHECK(filter_records(records, 10, 128).size() == 2);
}

TEST_CASE("JSONL dataset round-trips 100 records") {
  Rng rng(77);
  std::vector<ProteinRecord> records;
  for (int i = 0; i < 100; ++i) {
    ProteinRecord r;
    r.accession = "P" + std::to_string(10000 + i);
    const int len = 5 + static_cast<int>(rng.uniform_int(60));
    for (int j = 0; j < len; ++j) {
      r.sequence.push_back(kAlphabet[static_cast<size_t>(rng.uniform_int(20))]);
    }
    r.organism_lineage = {"Eukaryota", "Metazoa"};
    r.keywords = {"Test", "Fixture"};
    r.function_text = "Does thing " + std::to_string(i) + " with \"quotes\" and \\slashes.";
    r.description = build_description(r);
    records.push_back(std::move(r));
  }
  const std::string path = "roundtrip_test.jsonl";
  write_protsemantic(records, path);
  const auto loaded = read_protsemantic(path);
  REQUIRE(loaded.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].accession == records[i].accession);
    CHECK(loaded[i].sequence == records[i].sequence);
    CHECK(loaded[i].organism_lineage == records[i].organism_lineage);
    CHECK(loaded[i].keywords == records[i].keywords);
    CHECK(loaded[i].function_text == records[i].function_text);
    CHECK(loaded[i].description == records[i].description);
  }
  std::remove(path.c_str());
}

TEST_CASE("empty record list round-trips to an empty file") {
  const std::string path = "roundtrip_empty.jsonl";
  write_protsemantic({}, path);
  CHECK(read_protsemantic(path).empty());
  std::remove(path.c_str());
}

TEST_CASE("JSONL line without a sequence field names the line") {
  const std::string path = "bad_line.jsonl";
  {
    std::ofstream out(path);
    out << R"({"accession":"P1","sequence":"ACD"})" << '\n';
    out << R"({"accession":"P2"})" << '\n';
  }
  CHECK_THROWS_WITH_AS(read_protsemantic(path), doctest::Contains("line 2"), Error);
  std::remove(path.c_str());
}

TEST_CASE("manifest captures counts and the length histogram") {
  std::istringstream in(kTwoEntryFixture);
  ParseCounters parse_counters;
  auto records = parse_swissprot_dat(in, &parse_counters);
  FilterCounts filter_counts;
  records = filter_records(records, 1, 128, &filter_counts);
  const auto manifest =
      build_manifest(records, "deadbeef", 1, 128, parse_counters, filter_counts);
  CHECK(manifest.record_count == 2);
  CHECK(manifest.source_digest == "deadbeef");
  CHECK(manifest.length_histogram.at(12) == 1);
  CHECK(manifest.length_histogram.at(6) == 1);
  CHECK(manifest.min_len == 1);
  CHECK(manifest.max_len == 128);
}
