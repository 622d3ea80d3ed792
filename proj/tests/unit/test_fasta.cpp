// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "core/error.hpp"
#include "pipeline/fasta.hpp"

using namespace cmadiff;

namespace {
std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("length-70 sequence wraps into 60 + 10 body lines") {
  const std::string path = "wrap_test.fasta";
  write_fasta({{"seq0", std::string(70, 'A')}}, path);
  const std::string text = slurp(path);
  CHECK(text == ">seq0\n" + std::string(60, 'A') + "\n" + std::string(10, 'A') + "\n");
  std::remove(path.c_str());
}

TEST_CASE("empty record list writes an empty file") {
  const std::string path = "empty_test.fasta";
  write_fasta({}, path);
  CHECK(slurp(path).empty());
  CHECK(read_fasta(path).empty());
  std::remove(path.c_str());
}

TEST_CASE("round-trip recovers sequences exactly") {
  const std::string path = "roundtrip_test.fasta";
  const std::vector<FastaRecord> records = {
      {"first|record", "MKTAYIAKQRDL"},
      {"second", std::string(130, 'W')},
      {"third with spaces", "ACDEFGHIKLMNPQRSTVWY"},
  };
  write_fasta(records, path);
  const auto loaded = read_fasta(path);
  REQUIRE(loaded.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].header == records[i].header);
    CHECK(loaded[i].sequence == records[i].sequence);
  }
  std::remove(path.c_str());
}

TEST_CASE("reader tolerates CRLF and blank lines") {
  const std::string path = "crlf_test.fasta";
  std::ofstream(path) << ">a\r\nACD\r\nEFG\r\n\r\n>b\nKLM\n";
  const auto loaded = read_fasta(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].sequence == "ACDEFG");
  CHECK(loaded[1].sequence == "KLM");
  std::remove(path.c_str());
}

TEST_CASE("sequence data before any header is an error naming the line") {
  const std::string path = "headerless_test.fasta";
  std::ofstream(path) << "ACDEF\n";
  CHECK_THROWS_WITH_AS(read_fasta(path), doctest::Contains("line 1"), Error);
  std::remove(path.c_str());
}

TEST_CASE("missing file is an io error") {
  CHECK_THROWS_AS(read_fasta("no_such_file.fasta"), Error);
}
