// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nn/checkpoint.hpp"
#include "nn/layers.hpp"
#include "nn/train_options.hpp"

namespace cmadiff {

struct AlignerConfig {
  int text_dim = 384;    // text encoder output width
  int hidden_dim = 64;
  int shared_dim = 64;   // joint embedding space
  int feature_dim = 16;  // k
  int vocab_buckets = 4096;

  double init_temperature = 0.07;
  bool learnable_temperature = true;
  double temp_min = 0.01;
  double temp_max = 1.0;

  bool symmetric = false;       // also anchor on features, average both losses
  bool hard_negatives = false;  // upweight top-k confusable negatives
  int hard_negative_k = 1;
  double hard_negative_weight = 2.0;

  double surrogate_weight = 1.0;  // auxiliary text -> feature regression head

  // "hash": self-contained trainable token encoder. "lookup": precomputed
  // sentence vectors keyed by text digest, supplied as a data file.
  std::string text_embedder = "hash";

  uint64_t seed = 0;

  void validate() const;
};

// Unit-norm vector in the shared space.
struct AlignedCondition {
  Eigen::VectorXd v;
  std::string provenance;  // "text" | "features"
};

// Entry (i,j) = cosine(text_i, feature_j); rows must be unit-norm.
Eigen::MatrixXd similarity_matrix(const Eigen::MatrixXd& text_embs,
                                  const Eigen::MatrixXd& feat_embs);

// Mean over rows i of -log softmax_j(sim(i,j)/tau) at j = i; the symmetric
// variant averages the column-anchored counterpart.
double contrastive_loss(const Eigen::MatrixXd& sim, double tau, bool symmetric = false);

// Per row, the k highest off-diagonal entries, as (row, col) pairs ordered by
// row then descending similarity.
std::vector<std::pair<int, int>> mine_hard_negatives(const Eigen::MatrixXd& sim, int k);

class AlignerModel {
 public:
  explicit AlignerModel(const AlignerConfig& config);

  AlignerModel(const AlignerModel&) = delete;
  AlignerModel& operator=(const AlignerModel&) = delete;
  AlignerModel(AlignerModel&&) = default;
  AlignerModel& operator=(AlignerModel&&) = default;

  static AlignerModel from_checkpoint(const Checkpoint& ckpt);
  Checkpoint to_checkpoint() const;

  const AlignerConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  // graph builders (1 x shared_dim, unit rows)
  ad::NodePtr embed_text_graph(const std::string& text) const;
  ad::NodePtr embed_features_graph(const Eigen::VectorXd& features) const;
  // k-dim feature estimate regressed from a text embedding node
  ad::NodePtr surrogate_graph(const ad::NodePtr& text_emb) const;
  ad::NodePtr temperature_graph() const;  // 1x1, clamped to bounds

  // value paths
  AlignedCondition embed_text(const std::string& text) const;
  AlignedCondition embed_features(const Eigen::VectorXd& features) const;
  AlignedCondition text_to_condition(const std::string& text) const { return embed_text(text); }
  Eigen::VectorXd surrogate_features(const std::string& text) const;
  double temperature() const;

  // lookup-mode vector table (text sha256 hex -> text_dim vector)
  void set_text_vectors(std::map<std::string, Eigen::VectorXd> table);
  void load_text_vectors(const std::string& path);

 private:
  void wire();
  ad::NodePtr text_vector_graph(const std::string& text) const;  // 1 x text_dim

  AlignerConfig cfg_;
  ParamStore store_;
  ad::NodePtr token_emb_;  // vocab_buckets x text_dim (hash mode)
  Linear text_proj1_, text_proj2_;
  ad::NodePtr feat_lift_, feat_pos_;  // feature_dim x hidden_dim
  TransformerBlock feat_block_;
  Linear feat_proj_;
  Linear surrogate_;
  ad::NodePtr log_tau_;  // 1x1 (learnable mode only)
  std::map<std::string, Eigen::VectorXd> text_vectors_;
};

struct AlignerPair {
  std::string text;
  Eigen::VectorXd features;
};

struct AlignerEpochStats {
  int epoch = 0;
  double loss = 0;            // contrastive term
  double surrogate_loss = 0;  // auxiliary regression term
  double retrieval_top1 = 0;  // text -> feature on the training pairs
  double tau = 0;
};

std::vector<AlignerEpochStats> train_aligner(AlignerModel& model,
                                             const std::vector<AlignerPair>& pairs,
                                             const TrainOptions& opts, uint64_t seed,
                                             const std::string& save_path = "");

// Fraction of texts whose best-cosine feature row is their own pair.
double retrieval_top1(const AlignerModel& model, const std::vector<AlignerPair>& pairs);

}  // namespace cmadiff
