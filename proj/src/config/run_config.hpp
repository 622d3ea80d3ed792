// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "align/aligner.hpp"
#include "cvae/cvae.hpp"
#include "diffusion/diffusion.hpp"
#include "nn/train_options.hpp"

namespace cmadiff {

// Unified run configuration: defaults <- config file <- --set overrides, in
// that precedence. Keys mirror the module config types; unknown keys are
// rejected with their full dotted path. Seeds are not config keys — the
// global `seed` governs every stage.
struct RunConfig {
  uint64_t seed = 0;
  std::string out_dir = "out";
  std::string log_level = "info";  // quiet | info | debug

  struct Featurizer {
    int l_max = 128;
    std::string table_csv;  // empty: embedded descriptor table
  } featurizer;

  struct Ingest {
    int min_length = 10;
    int max_length = 128;
  } ingest;

  struct CvaeSection {
    CvaeConfig model;
    TrainOptions train;
  } cvae;

  struct AlignerSection {
    AlignerConfig model;
    TrainOptions train;
    std::string text_vectors;  // lookup-mode embedding file
    double holdout = 0.0;      // fraction of pairs held out for retrieval reporting
  } aligner;

  struct DiffusionSection {
    DiffusionConfig model;
    TrainOptions train;
    bool use_sampled_z = false;   // reparameterized z_0 instead of the posterior mean
    double cond_dropout = 0.1;    // fraction of examples trained with the null token
  } diffusion;

  struct Generation {
    std::string mode = "random_feature";
    std::string text;
    std::vector<double> features;  // raw-feature targets
    int count = 1;
    int min_length = 10;
    int max_length = 128;
  } generation;

  struct Evaluation {
    double novelty_threshold = 0.20;
    double min_score = 70.0;
  } evaluation;

  bool verbose() const { return log_level == "debug"; }
  bool quiet() const { return log_level == "quiet"; }

  void validate() const;
  std::string to_json_text() const;
};

// Applies a JSON document onto the config, rejecting unknown keys and type
// mismatches with the full dotted path.
void apply_config_json(RunConfig& config, const std::string& json_text,
                       const std::string& source_name);

// Overrides are "dotted.path=value" strings; values parse as JSON scalars
// (falling back to plain strings).
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

}  // namespace cmadiff
