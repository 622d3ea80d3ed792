// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <string>

#include "aa/featurizer.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

using namespace cmadiff;

namespace {
std::string random_sequence(Rng& rng, int length) {
  std::string s;
  for (int i = 0; i < length; ++i) {
    s.push_back(kAlphabet[static_cast<size_t>(rng.uniform_int(20))]);
  }
  return s;
}
}  // namespace

TEST_CASE("one-hot basics") {
  SUBCASE("A with L_max 2 sets channel(A) then padding") {
    const Eigen::MatrixXd oh = encode_one_hot("A", 2);
    REQUIRE(oh.rows() == 2);
    REQUIRE(oh.cols() == 21);
    CHECK(oh(0, 0) == 1.0);
    CHECK(oh.row(0).sum() == 1.0);
    CHECK(oh(1, kPaddingChannel) == 1.0);
    CHECK(oh.row(1).sum() == 1.0);
  }
  SUBCASE("ACD with L_max 3 has no padding ones") {
    const Eigen::MatrixXd oh = encode_one_hot("ACD", 3);
    CHECK(oh.col(kPaddingChannel).sum() == 0.0);
    CHECK(oh(0, 0) == 1.0);
    CHECK(oh(1, 1) == 1.0);
    CHECK(oh(2, 2) == 1.0);
  }
  SUBCASE("non-standard letter names position and character") {
    CHECK_THROWS_WITH_AS(encode_one_hot("AXA", 3),
                         doctest::Contains("position 1"), Error);
    CHECK_THROWS_WITH_AS(encode_one_hot("AXA", 3), doctest::Contains("'X'"), Error);
  }
  SUBCASE("empty and over-length sequences are rejected") {
    CHECK_THROWS_AS(encode_one_hot("", 4), Error);
    CHECK_THROWS_AS(encode_one_hot("ACDEF", 4), Error);
  }
}

TEST_CASE("global features: published arithmetic examples") {
  const auto table = load_property_table();
  const int h1 = AminoAcidPropertyTable::column_index("H_1");

  SUBCASE("single residue equals its table row exactly") {
    const auto bundle = featurize("A", table, 4, /*normalized=*/false);
    CHECK((bundle.global.transpose() - table.row('A')).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("AC raw H_1 mean is 0.455") {
    const auto bundle = featurize("AC", table, 4, /*normalized=*/false);
    CHECK(bundle.global[h1] == doctest::Approx((0.62 + 0.29) / 2.0).epsilon(1e-12));
    CHECK(bundle.global[h1] == doctest::Approx(0.455).epsilon(1e-12));
  }
  SUBCASE("AAAA repeats the Alanine row") {
    const auto bundle = featurize("AAAA", table, 6, /*normalized=*/false);
    CHECK((bundle.global.transpose() - table.row('A')).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 1; i < 4; ++i) {
      CHECK((bundle.local.row(i) - bundle.local.row(0)).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("global equals the mean of local rows within 1e-12 on random sequences") {
  const auto table = load_property_table();
  Rng rng(20260815);
  for (int trial = 0; trial < 200; ++trial) {
    const int length = 1 + static_cast<int>(rng.uniform_int(128));
    const std::string seq = random_sequence(rng, length);
    for (bool normalized : {false, true}) {
      const auto bundle = featurize(seq, table, 128, normalized);
      REQUIRE(bundle.length == length);
      const Eigen::VectorXd mean =
          bundle.local.topRows(length).colwise().mean().transpose();
      CHECK((bundle.global - mean).cwiseAbs().maxCoeff() < 1e-12);
      // padding rows contribute nothing
      if (length < 128) {
        CHECK(bundle.local.bottomRows(128 - length).cwiseAbs().maxCoeff() == 0.0);
      }
      // one-hot rows each sum to exactly 1
      for (int r = 0; r < 128; ++r) CHECK(bundle.one_hot.row(r).sum() == 1.0);
    }
  }
}

TEST_CASE("normalized featurization uses the table column statistics") {
  const auto table = load_property_table();
  const auto bundle = featurize("W", table, 2, /*normalized=*/true);
  const Eigen::VectorXd expected =
      (table.row('W').transpose() - table.col_mean).cwiseQuotient(table.col_std);
  CHECK((bundle.global - expected).cwiseAbs().maxCoeff() < 1e-12);
}
