// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "aa/property_table.hpp"
#include "core/error.hpp"

using namespace cmadiff;

TEST_CASE("embedded table has published reference values") {
  const auto table = load_property_table();
  REQUIRE(table.values.rows() == 20);
  REQUIRE(table.values.cols() == 16);
  CHECK(table.value('A', "H_1") == doctest::Approx(0.62).epsilon(1e-12));
  CHECK(table.value('W', "p_2") == doctest::Approx(0.409).epsilon(1e-12));
  CHECK(table.value('G', "stc") == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(table.value('C', "H_1") == doctest::Approx(0.29).epsilon(1e-12));
  CHECK(table.value('R', "H_1") == doctest::Approx(-2.53).epsilon(1e-12));
}

TEST_CASE("row and column indexing") {
  CHECK(AminoAcidPropertyTable::row_index('A') == 0);
  CHECK(AminoAcidPropertyTable::row_index('Y') == 19);
  CHECK(AminoAcidPropertyTable::row_index('X') == -1);
  CHECK(AminoAcidPropertyTable::row_index('a') == -1);
  CHECK(AminoAcidPropertyTable::column_index("stc") == 0);
  CHECK(AminoAcidPropertyTable::column_index("F") == 15);
  CHECK(AminoAcidPropertyTable::column_index("bogus") == -1);
  const auto table = load_property_table();
  CHECK_THROWS_AS(table.value('X', "H_1"), Error);
  CHECK_THROWS_AS(table.value('A', "nope"), Error);
}

TEST_CASE("column statistics are population moments over the 20 rows") {
  const auto table = load_property_table();
  for (int c = 0; c < 16; ++c) {
    const double mean = table.values.col(c).mean();
    const double var = (table.values.col(c).array() - mean).square().mean();
    CHECK(table.col_mean[c] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(table.col_std[c] == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
  }
}

TEST_CASE("normalized table has zero mean and unit std per column") {
  const auto normalized = normalize_table(load_property_table());
  CHECK(normalized.normalized);
  for (int c = 0; c < 16; ++c) {
    const double mean = normalized.values.col(c).mean();
    const double var = (normalized.values.col(c).array() - mean).square().mean();
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-12);
  }
}

TEST_CASE("normalizing a constant column yields zeros") {
  auto table = load_property_table();
  table.values.col(3).setConstant(7.5);
  table.col_mean[3] = 7.5;
  table.col_std[3] = 0.0;
  const auto normalized = normalize_table(table);
  CHECK(normalized.values.col(3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("anomaly screen flags exactly the two published outlier cells") {
  const auto flags = validate_table(load_property_table());
  REQUIRE(flags.size() == 2);
  std::set<std::pair<char, std::string>> found;
  for (const auto& flag : flags) {
    found.insert({flag.aa, flag.column});
    CHECK(flag.z > 5.0);
  }
  CHECK(found == std::set<std::pair<char, std::string>>{{'G', "stc"}, {'T', "SASA"}});
}

TEST_CASE("CSV override round-trips the embedded values") {
  const auto table = load_property_table();
  const std::string path = "table_roundtrip.csv";
  {
    std::ofstream out(path);
    out << "aa";
    for (const auto& name : kPropertyNames) out << ',' << name;
    out << '\n';
    out.precision(17);
    for (int r = 0; r < 20; ++r) {
      out << kAlphabet[static_cast<size_t>(r)];
      for (int c = 0; c < 16; ++c) out << ',' << table.values(r, c);
      out << '\n';
    }
  }
  const auto loaded = load_property_table_csv(path);
  CHECK((loaded.values - table.values).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("CSV override rejects malformed input") {
  const std::string path = "table_bad.csv";
  SUBCASE("wrong header") {
    std::ofstream(path) << "aa,foo\nA,1\n";
    CHECK_THROWS_AS(load_property_table_csv(path), Error);
  }
  SUBCASE("missing residue") {
    std::ofstream out(path);
    out << "aa";
    for (const auto& name : kPropertyNames) out << ',' << name;
    out << "\nA";
    for (int c = 0; c < 16; ++c) out << ",0.5";
    out << '\n';
    CHECK_THROWS_AS(load_property_table_csv(path), Error);
  }
  SUBCASE("nonexistent file") {
    CHECK_THROWS_AS(load_property_table_csv("does_not_exist.csv"), Error);
  }
  std::remove(path.c_str());
}
