// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "aa/featurizer.hpp"
#include "aa/property_table.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"
#include "pipeline/generation.hpp"

using namespace cmadiff;

namespace {

AlignerModel tiny_aligner() {
  AlignerConfig config;
  config.text_dim = 12;
  config.hidden_dim = 8;
  config.shared_dim = 6;
  config.feature_dim = 16;
  config.vocab_buckets = 64;
  config.seed = 7;
  return AlignerModel(config);
}

CvaeModel tiny_cvae() {
  CvaeConfig config;
  config.latent_dim = 4;
  config.hidden_dim = 8;
  config.l_max = 16;
  config.seed = 11;
  return CvaeModel(config);
}

DiffusionModel tiny_diffusion() {
  DiffusionConfig config;
  config.latent_dim = 4;
  config.cond_dim = 6;
  config.channels = 4;
  config.levels = 1;
  config.time_dim = 4;
  config.T = 6;
  config.seed = 3;
  return DiffusionModel(config);
}

GenerationRequest tiny_request() {
  GenerationRequest request;
  request.mode = ConditionMode::RandomFeature;
  request.count = 2;
  request.min_length = 2;
  request.max_length = 16;
  request.seed = 9;
  return request;
}

}  // namespace

TEST_CASE("condition mode names round-trip and reject unknowns") {
  CHECK(to_string(ConditionMode::Text) == "text");
  CHECK(to_string(ConditionMode::RawFeature) == "raw_feature");
  CHECK(to_string(ConditionMode::RandomFeature) == "random_feature");
  CHECK(condition_mode_from_string("text") == ConditionMode::Text);
  CHECK(condition_mode_from_string("raw_feature") == ConditionMode::RawFeature);
  CHECK(condition_mode_from_string("raw-feature") == ConditionMode::RawFeature);
  CHECK(condition_mode_from_string("random_feature") == ConditionMode::RandomFeature);
  CHECK(condition_mode_from_string("random-feature") == ConditionMode::RandomFeature);
  CHECK_THROWS_WITH_AS(condition_mode_from_string("surprise"), doctest::Contains("surprise"),
                       Error);
}

TEST_CASE("generation requests validate counts, lengths, and mode payloads") {
  GenerationRequest request = tiny_request();
  CHECK_NOTHROW(request.validate(16, 16));

  request.count = -1;
  CHECK_THROWS_AS(request.validate(16, 16), Error);

  request = tiny_request();
  request.min_length = 0;
  CHECK_THROWS_AS(request.validate(16, 16), Error);

  request = tiny_request();
  request.min_length = 10;
  request.max_length = 5;
  CHECK_THROWS_AS(request.validate(16, 16), Error);

  request = tiny_request();
  request.max_length = 17;  // beyond l_max
  CHECK_THROWS_AS(request.validate(16, 16), Error);

  request = tiny_request();
  request.mode = ConditionMode::Text;
  request.text = "";
  CHECK_THROWS_WITH_AS(request.validate(16, 16), doctest::Contains("text"), Error);

  request = tiny_request();
  request.mode = ConditionMode::RawFeature;
  request.target_features = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_WITH_AS(request.validate(16, 16), doctest::Contains("16"), Error);
}

TEST_CASE("random feature targets stay inside the table's per-column ranges") {
  const auto table = load_property_table();
  const Eigen::VectorXd lo = table.col_min();
  const Eigen::VectorXd hi = table.col_max();

  const Eigen::VectorXd first = sample_random_features(table, 42);
  CHECK((first - sample_random_features(table, 42)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((first - sample_random_features(table, 43)).cwiseAbs().maxCoeff() > 0.0);

  for (uint64_t seed = 0; seed < 10000; ++seed) {
    const Eigen::VectorXd draw = sample_random_features(table, seed);
    REQUIRE(draw.size() == lo.size());
    for (Eigen::Index i = 0; i < draw.size(); ++i) {
      REQUIRE(draw(i) >= lo(i));
      REQUIRE(draw(i) <= hi(i));
    }
  }
}

TEST_CASE("decode_to_sequence follows the first-padding-argmax rule") {
  const int rows = 16;
  SUBCASE("padding argmax at position 12 ends the sequence there") {
    Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(rows, kOneHotChannels);
    for (int i = 0; i < rows; ++i) logits(i, i % 20) = 5.0;  // letter channels win
    logits(12, kPaddingChannel) = 9.0;                       // first padding win
    const std::string seq = decode_to_sequence(logits, 10, 16);
    REQUIRE(seq.size() == 12);
    for (int i = 0; i < 12; ++i) CHECK(seq[i] == kAlphabet[i % 20]);
  }
  SUBCASE("early padding is clamped up to min_length") {
    Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(rows, kOneHotChannels);
    for (int i = 0; i < rows; ++i) logits(i, 3) = 1.0;
    logits(4, kPaddingChannel) = 7.0;  // argmax padding at position 4
    const std::string seq = decode_to_sequence(logits, 10, 16);
    REQUIRE(seq.size() == 10);
    // within the clamped tail the letter is still the best non-padding channel
    CHECK(seq[4] == kAlphabet[3]);
  }
  SUBCASE("no padding argmax emits max_length letters") {
    Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(rows, kOneHotChannels);
    for (int i = 0; i < rows; ++i) logits(i, 7) = 2.0;
    CHECK(decode_to_sequence(logits, 2, 13).size() == 13);
  }
  SUBCASE("all-zero logits resolve every tie to the first channel") {
    const Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(rows, kOneHotChannels);
    const std::string seq = decode_to_sequence(logits, 2, 16);
    CHECK(seq == std::string(16, kAlphabet[0]));
  }
  SUBCASE("letter ties resolve to the lowest channel index") {
    Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(rows, kOneHotChannels);
    logits(0, 2) = 3.0;
    logits(0, 5) = 3.0;
    const std::string seq = decode_to_sequence(logits, 1, 1);
    CHECK(seq == std::string(1, kAlphabet[2]));
  }
  SUBCASE("arbitrary logits only ever emit canonical letters") {
    Rng rng(5);
    Eigen::MatrixXd logits(rows, kOneHotChannels);
    for (int i = 0; i < rows; ++i) {
      logits.row(i) = rng.normal_vector(kOneHotChannels).transpose();
    }
    const std::string seq = decode_to_sequence(logits, 2, 16);
    for (char ch : seq) CHECK(kAlphabet.find(ch) != std::string_view::npos);
  }
  SUBCASE("invalid logits and bounds are rejected") {
    Eigen::MatrixXd narrow = Eigen::MatrixXd::Zero(rows, 20);
    CHECK_THROWS_AS(decode_to_sequence(narrow, 2, 16), Error);
    Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(rows, kOneHotChannels);
    CHECK_THROWS_AS(decode_to_sequence(logits, 0, 16), Error);
    CHECK_THROWS_AS(decode_to_sequence(logits, 2, 17), Error);
    logits(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(decode_to_sequence(logits, 2, 16), Error);
  }
}

TEST_CASE("build_condition resolves each mode into aligned/raw/decoder spaces") {
  const auto table = load_property_table();
  const AlignerModel aligner = tiny_aligner();

  SUBCASE("raw-feature targets are z-scored with table statistics, then embedded") {
    GenerationRequest request = tiny_request();
    request.mode = ConditionMode::RawFeature;
    request.target_features = table.values.row(0).transpose();  // a real row: plausible units

    const ConditionBundle bundle = build_condition(request, aligner, table);
    CHECK(bundle.raw_features == request.target_features);

    Eigen::VectorXd expected(16);
    for (int i = 0; i < 16; ++i) {
      expected(i) = (request.target_features(i) - table.col_mean(i)) / table.col_std(i);
    }
    CHECK((bundle.decoder_features - expected).cwiseAbs().maxCoeff() < 1e-15);
    const auto direct = aligner.embed_features(bundle.decoder_features);
    CHECK((bundle.condition.v - direct.v).cwiseAbs().maxCoeff() == 0.0);
    CHECK(bundle.condition.provenance == "features");
  }
  SUBCASE("random mode draws the raw target from the request seed") {
    GenerationRequest request = tiny_request();
    const ConditionBundle bundle = build_condition(request, aligner, table);
    CHECK((bundle.raw_features - sample_random_features(table, request.seed))
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(bundle.condition.v.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("text mode embeds the text and derives decoder features from the surrogate") {
    GenerationRequest request = tiny_request();
    request.mode = ConditionMode::Text;
    request.text = "cationic pore-forming toxin";
    const ConditionBundle bundle = build_condition(request, aligner, table);
    CHECK(bundle.raw_features.size() == 0);
    CHECK((bundle.condition.v - aligner.embed_text(request.text).v).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK((bundle.decoder_features - aligner.surrogate_features(request.text))
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(bundle.condition.provenance == "text");
  }
  SUBCASE("a table whose width disagrees with the aligner is rejected") {
    AlignerConfig narrow;
    narrow.text_dim = 12;
    narrow.hidden_dim = 8;
    narrow.shared_dim = 6;
    narrow.feature_dim = 4;
    narrow.vocab_buckets = 64;
    const AlignerModel small(narrow);
    CHECK_THROWS_WITH_AS(build_condition(tiny_request(), small, table),
                         doctest::Contains("16"), Error);
  }
}

TEST_CASE("generate runs the full pipeline deterministically") {
  const auto table = load_property_table();
  const AlignerModel aligner = tiny_aligner();
  const CvaeModel cvae = tiny_cvae();
  const DiffusionModel diffusion = tiny_diffusion();

  GenerationRequest request = tiny_request();
  request.count = 3;
  const auto first = generate(request, cvae, aligner, diffusion, table);
  const auto again = generate(request, cvae, aligner, diffusion, table);
  REQUIRE(first.size() == 3);
  REQUIRE(again.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(first[i].sequence == again[i].sequence);
    CHECK(first[i].sequence.size() >= 2);
    CHECK(first[i].sequence.size() <= 16);
    for (char ch : first[i].sequence) CHECK(kAlphabet.find(ch) != std::string_view::npos);
    CHECK(first[i].mode == "random_feature");
    CHECK(first[i].provenance == "features");
    CHECK(first[i].seed == 9);
    CHECK(first[i].latent.find("chain=" + std::to_string(i)) != std::string::npos);
    // realized features are the normalized globals of the emitted sequence
    const Eigen::VectorXd expect =
        featurize(first[i].sequence, table, 16, /*normalized=*/true).global;
    CHECK((first[i].realized_features - expect).cwiseAbs().maxCoeff() == 0.0);
  }

  request.count = 0;
  CHECK(generate(request, cvae, aligner, diffusion, table).empty());

  request = tiny_request();
  request.mode = ConditionMode::Text;
  request.text = "short basic peptide";
  const auto texty = generate(request, cvae, aligner, diffusion, table);
  REQUIRE(texty.size() == 2);
  CHECK(texty[0].mode == "text");
  CHECK(texty[0].provenance == "text");
}

TEST_CASE("generate rejects models whose dimensions disagree") {
  const auto table = load_property_table();
  const AlignerModel aligner = tiny_aligner();
  const CvaeModel cvae = tiny_cvae();

  DiffusionConfig wide;
  wide.latent_dim = 8;  // cvae has 4
  wide.cond_dim = 6;
  wide.channels = 4;
  wide.levels = 1;
  wide.time_dim = 4;
  wide.T = 6;
  const DiffusionModel mismatched_latent(wide);
  CHECK_THROWS_WITH_AS(generate(tiny_request(), cvae, aligner, mismatched_latent, table),
                       doctest::Contains("latent"), Error);

  DiffusionConfig narrow_cond;
  narrow_cond.latent_dim = 4;
  narrow_cond.cond_dim = 5;  // aligner shared_dim is 6
  narrow_cond.channels = 4;
  narrow_cond.levels = 1;
  narrow_cond.time_dim = 4;
  narrow_cond.T = 6;
  const DiffusionModel mismatched_cond(narrow_cond);
  CHECK_THROWS_WITH_AS(generate(tiny_request(), cvae, aligner, mismatched_cond, table),
                       doctest::Contains("condition"), Error);
}

TEST_CASE("FASTA records carry the indexed header convention") {
  GeneratedSequence g1;
  g1.sequence = "ACDEFG";
  g1.mode = "text";
  g1.seed = 123;
  GeneratedSequence g2;
  g2.sequence = "KKKK";
  g2.mode = "random_feature";
  g2.seed = 123;
  const auto records = to_fasta_records({g1, g2});
  REQUIRE(records.size() == 2);
  CHECK(records[0].header == "cmadiff|0|seed=123|mode=text");
  CHECK(records[0].sequence == "ACDEFG");
  CHECK(records[1].header == "cmadiff|1|seed=123|mode=random_feature");
  CHECK(to_fasta_records({}).empty());
}
