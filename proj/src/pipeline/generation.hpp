// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "aa/featurizer.hpp"
#include "align/aligner.hpp"
#include "cvae/cvae.hpp"
#include "diffusion/diffusion.hpp"
#include "pipeline/fasta.hpp"

namespace cmadiff {

enum class ConditionMode { Text, RawFeature, RandomFeature };

std::string to_string(ConditionMode mode);
// Accepts "text", "raw_feature"/"raw-feature", "random_feature"/"random-feature".
ConditionMode condition_mode_from_string(const std::string& name);

struct GenerationRequest {
  ConditionMode mode = ConditionMode::RandomFeature;
  std::string text;                 // mode = Text
  Eigen::VectorXd target_features;  // mode = RawFeature; raw property units
  int count = 1;
  int min_length = 10;
  int max_length = 128;
  uint64_t seed = 0;

  // l_max bounds the emitted length, feature_dim the raw target width.
  void validate(int l_max, int feature_dim) const;
};

struct GeneratedSequence {
  std::string sequence;
  std::string mode;                  // request mode name
  std::string provenance;            // condition provenance (text | features)
  Eigen::VectorXd realized_features; // normalized global features of `sequence`
  uint64_t seed = 0;                 // request seed
  std::string latent;                // which reverse chain produced the latent
};

// A request's condition resolved to every space downstream stages need: the
// shared-space vector steering the diffusion model, the raw-unit target (when
// one exists), and the normalized k-dim vector fed to the CVAE decoder and
// used as the evaluation target.
struct ConditionBundle {
  AlignedCondition condition;
  Eigen::VectorXd raw_features;      // empty in text mode
  Eigen::VectorXd decoder_features;  // normalized units
};

// Uniform per-column draw within the raw table's [min, max]; deterministic
// per seed.
Eigen::VectorXd sample_random_features(const AminoAcidPropertyTable& table, uint64_t seed);

// Raw-unit feature targets are z-scored with the table statistics before
// embedding, because the aligner is trained on normalized globals. Text mode
// derives the decoder features from the aligner's surrogate head.
ConditionBundle build_condition(const GenerationRequest& request, const AlignerModel& aligner,
                                const AminoAcidPropertyTable& table);

// Emitted length = first position whose argmax channel is padding (full
// max_length when none), clamped into [min_length, max_length]; letters are
// the per-position argmax over the 20 amino-acid channels, ties resolved to
// the lowest channel index.
std::string decode_to_sequence(const Eigen::MatrixXd& logits, int min_length, int max_length);

// condition -> diffusion sampling -> CVAE decoding -> sequences, with the
// realized global features of each emitted sequence attached. `table` holds
// raw property values.
std::vector<GeneratedSequence> generate(const GenerationRequest& request,
                                        const CvaeModel& cvae, const AlignerModel& aligner,
                                        const DiffusionModel& diffusion,
                                        const AminoAcidPropertyTable& table);

// FASTA headers: cmadiff|<index>|seed=<seed>|mode=<mode>.
std::vector<FastaRecord> to_fasta_records(const std::vector<GeneratedSequence>& sequences);

}  // namespace cmadiff
