// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "pipeline/generation.hpp"

#include <cmath>

#include "core/error.hpp"

namespace cmadiff {

std::string to_string(ConditionMode mode) {
  switch (mode) {
    case ConditionMode::Text:
      return "text";
    case ConditionMode::RawFeature:
      return "raw_feature";
    case ConditionMode::RandomFeature:
      return "random_feature";
  }
  fail(ErrorCode::Internal, "unreachable condition mode");
}

ConditionMode condition_mode_from_string(const std::string& name) {
  if (name == "text") return ConditionMode::Text;
  if (name == "raw_feature" || name == "raw-feature") return ConditionMode::RawFeature;
  if (name == "random_feature" || name == "random-feature") return ConditionMode::RandomFeature;
  fail(ErrorCode::InvalidArgument,
       "unknown generation mode '" + name + "' (expected text, raw-feature, or random-feature)");
}

void GenerationRequest::validate(int l_max, int feature_dim) const {
  if (count < 0) fail(ErrorCode::InvalidArgument, "generation count must be >= 0");
  if (min_length < 1 || min_length > max_length || max_length > l_max) {
    fail(ErrorCode::InvalidArgument,
         "length bounds [" + std::to_string(min_length) + ", " + std::to_string(max_length) +
             "] must satisfy 1 <= min <= max <= " + std::to_string(l_max));
  }
  if (mode == ConditionMode::Text && text.empty()) {
    fail(ErrorCode::InvalidArgument, "text mode requires a non-empty description");
  }
  if (mode == ConditionMode::RawFeature && target_features.size() != feature_dim) {
    fail(ErrorCode::InvalidArgument,
         "raw-feature mode requires " + std::to_string(feature_dim) + " target values, got " +
             std::to_string(target_features.size()));
  }
}

Eigen::VectorXd sample_random_features(const AminoAcidPropertyTable& table, uint64_t seed) {
  Rng rng(seed ^ 0xfea70125ULL);
  const Eigen::VectorXd lo = table.col_min();
  const Eigen::VectorXd hi = table.col_max();
  Eigen::VectorXd out(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) out(i) = rng.uniform(lo(i), hi(i));
  return out;
}

namespace {

// Raw property units -> the z-scored space models are trained in.
Eigen::VectorXd normalize_features(const Eigen::VectorXd& raw,
                                   const AminoAcidPropertyTable& table) {
  Eigen::VectorXd out(raw.size());
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    out(i) = table.col_std(i) > 0 ? (raw(i) - table.col_mean(i)) / table.col_std(i) : 0.0;
  }
  return out;
}

}  // namespace

ConditionBundle build_condition(const GenerationRequest& request, const AlignerModel& aligner,
                                const AminoAcidPropertyTable& table) {
  const int k = aligner.config().feature_dim;
  if (static_cast<int>(table.values.cols()) != k) {
    fail(ErrorCode::ShapeMismatch,
         "property table has " + std::to_string(table.values.cols()) +
             " columns, aligner expects " + std::to_string(k) + " features");
  }
  ConditionBundle bundle;
  switch (request.mode) {
    case ConditionMode::Text: {
      if (request.text.empty()) {
        fail(ErrorCode::InvalidArgument, "text mode requires a non-empty description");
      }
      bundle.condition = aligner.text_to_condition(request.text);
      bundle.decoder_features = aligner.surrogate_features(request.text);
      break;
    }
    case ConditionMode::RawFeature: {
      if (request.target_features.size() != k) {
        fail(ErrorCode::ShapeMismatch,
             "raw-feature target has dimension " + std::to_string(request.target_features.size()) +
                 ", aligner expects " + std::to_string(k));
      }
      bundle.raw_features = request.target_features;
      bundle.decoder_features = normalize_features(bundle.raw_features, table);
      bundle.condition = aligner.embed_features(bundle.decoder_features);
      break;
    }
    case ConditionMode::RandomFeature: {
      bundle.raw_features = sample_random_features(table, request.seed);
      bundle.decoder_features = normalize_features(bundle.raw_features, table);
      bundle.condition = aligner.embed_features(bundle.decoder_features);
      break;
    }
  }
  return bundle;
}

std::string decode_to_sequence(const Eigen::MatrixXd& logits, int min_length, int max_length) {
  if (logits.cols() != kOneHotChannels) {
    fail(ErrorCode::ShapeMismatch, "decode: logits have " + std::to_string(logits.cols()) +
                                       " channels, expected " +
                                       std::to_string(kOneHotChannels));
  }
  if (!logits.allFinite()) fail(ErrorCode::Numeric, "decode: logits contain non-finite values");
  if (min_length < 1 || min_length > max_length ||
      max_length > static_cast<int>(logits.rows())) {
    fail(ErrorCode::InvalidArgument,
         "decode: length bounds [" + std::to_string(min_length) + ", " +
             std::to_string(max_length) + "] must satisfy 1 <= min <= max <= " +
             std::to_string(logits.rows()));
  }

  // First position that prefers the padding channel ends the sequence.
  int length = max_length;
  for (int i = 0; i < max_length; ++i) {
    int best = 0;
    for (int c = 1; c < kOneHotChannels; ++c) {
      if (logits(i, c) > logits(i, best)) best = c;
    }
    if (best == kPaddingChannel) {
      length = i;
      break;
    }
  }
  length = std::max(length, min_length);

  std::string sequence;
  sequence.reserve(length);
  for (int i = 0; i < length; ++i) {
    int best = 0;
    for (int c = 1; c < kAlphabetSize; ++c) {
      if (logits(i, c) > logits(i, best)) best = c;
    }
    sequence.push_back(kAlphabet[best]);
  }
  return sequence;
}

std::vector<GeneratedSequence> generate(const GenerationRequest& request,
                                        const CvaeModel& cvae, const AlignerModel& aligner,
                                        const DiffusionModel& diffusion,
                                        const AminoAcidPropertyTable& table) {
  const auto check_dim = [](const std::string& what, int got, int expected) {
    if (got != expected) {
      fail(ErrorCode::ShapeMismatch,
           what + " (" + std::to_string(got) + " vs " + std::to_string(expected) + ")");
    }
  };
  check_dim("aligner shared dimension does not match diffusion condition dimension",
            aligner.config().shared_dim, diffusion.config().cond_dim);
  check_dim("CVAE latent dimension does not match diffusion latent dimension",
            cvae.config().latent_dim, diffusion.config().latent_dim);
  check_dim("aligner feature dimension does not match CVAE feature dimension",
            aligner.config().feature_dim, cvae.config().feature_dim);
  request.validate(cvae.config().l_max, aligner.config().feature_dim);

  const ConditionBundle bundle = build_condition(request, aligner, table);
  const auto latents =
      diffusion.sample(bundle.condition.v, request.seed ^ 0x9e4e0a7eULL, request.count);

  std::vector<GeneratedSequence> out;
  out.reserve(latents.size());
  for (size_t i = 0; i < latents.size(); ++i) {
    GeneratedSequence gen;
    const Eigen::MatrixXd logits = cvae.decode(latents[i], bundle.decoder_features);
    gen.sequence = decode_to_sequence(logits, request.min_length, request.max_length);
    gen.mode = to_string(request.mode);
    gen.provenance = bundle.condition.provenance;
    gen.realized_features =
        featurize(gen.sequence, table, cvae.config().l_max, /*normalized=*/true).global;
    gen.seed = request.seed;
    gen.latent = "ddpm:T=" + std::to_string(diffusion.config().T) +
                 ",chain=" + std::to_string(i);
    out.push_back(std::move(gen));
  }
  return out;
}

std::vector<FastaRecord> to_fasta_records(const std::vector<GeneratedSequence>& sequences) {
  std::vector<FastaRecord> records;
  records.reserve(sequences.size());
  for (size_t i = 0; i < sequences.size(); ++i) {
    FastaRecord record;
    record.header = "cmadiff|" + std::to_string(i) + "|seed=" +
                    std::to_string(sequences[i].seed) + "|mode=" + sequences[i].mode;
    record.sequence = sequences[i].sequence;
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace cmadiff
