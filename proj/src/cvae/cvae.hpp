// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "aa/featurizer.hpp"
#include "nn/checkpoint.hpp"
#include "nn/layers.hpp"
#include "nn/train_options.hpp"

namespace cmadiff {

struct CvaeConfig {
  int latent_dim = 32;   // m
  int hidden_dim = 64;
  int feature_dim = kNumProperties;  // k
  int l_max = 128;
  int encoder_depth = 1;
  int decoder_depth = 1;
  double kl_weight = 0.5;  // beta
  bool cross_entropy_recon = false;
  uint64_t seed = 0;

  void validate() const;
};

struct EncoderOutput {
  Eigen::VectorXd mu;
  Eigen::VectorXd log_var;  // clamped to [-10, 10]
};

// z = mu + exp(0.5 * log_var) .* eps
Eigen::VectorXd reparameterize(const Eigen::VectorXd& mu, const Eigen::VectorXd& log_var,
                               const Eigen::VectorXd& eps);

// 0.5 * sum(mu^2 + exp(log_var) - 1 - log_var) against the standard normal.
double kl_divergence(const Eigen::VectorXd& mu, const Eigen::VectorXd& log_var);

// Sequence autoencoder with a Gaussian latent conditioned on global
// features: convolution stacks over the one-hot and local-feature streams,
// cross-attention fusion (sequence queries features), a transformer trunk,
// and Gaussian posterior heads; the decoder expands (z, f) back to
// per-position alphabet logits.
class CvaeModel {
 public:
  explicit CvaeModel(const CvaeConfig& config);

  CvaeModel(const CvaeModel&) = delete;
  CvaeModel& operator=(const CvaeModel&) = delete;
  CvaeModel(CvaeModel&&) = default;
  CvaeModel& operator=(CvaeModel&&) = default;

  static CvaeModel from_checkpoint(const Checkpoint& ckpt);
  Checkpoint to_checkpoint() const;

  const CvaeConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  struct EncodeNodes {
    ad::NodePtr mu;       // 1 x m
    ad::NodePtr log_var;  // 1 x m
  };
  EncodeNodes encode_graph(const FeatureBundle& bundle) const;
  // z: 1 x m node; returns l_max x 21 logits node
  ad::NodePtr decode_graph(const ad::NodePtr& z, const Eigen::VectorXd& global_feats) const;

  struct LossNodes {
    ad::NodePtr total, recon, kl;
  };
  // recon is the squared reconstruction error summed over the non-padded
  // region (cross-entropy when configured); total = recon + beta * kl.
  LossNodes loss_graph(const FeatureBundle& bundle, const Eigen::VectorXd& eps,
                       double beta) const;

  // value-only paths
  EncoderOutput encode(const FeatureBundle& bundle) const;
  Eigen::MatrixXd decode(const Eigen::VectorXd& z, const Eigen::VectorXd& global_feats) const;

 private:
  void wire();

  CvaeConfig cfg_;
  ParamStore store_;

  Conv1d enc_seq_lift_, enc_seq_res_, enc_feat_lift_, enc_feat_res_;
  LayerNorm enc_seq_ln_, enc_feat_ln_;
  ad::NodePtr enc_pos_;
  AttentionBlock enc_cross_;
  std::vector<TransformerBlock> enc_blocks_;
  Linear head_mu_, head_logvar_;

  Linear dec_seed_, dec_mem_z_, dec_mem_f_;
  ad::NodePtr dec_pos_;
  struct DecoderBlock {
    LayerNorm ln1, ln2, ln3;
    AttentionBlock self_attn, cross_attn;
    Linear ff1, ff2;
  };
  std::vector<DecoderBlock> dec_blocks_;
  LayerNorm dec_out_ln_;
  Conv1d dec_out_;
};

struct CvaeEpochStats {
  int epoch = 0;
  double total = 0, recon = 0, kl = 0;
  double lr = 0;
};

// Adam training over feature bundles; per-epoch stats returned. When
// `save_path` is non-empty and opts.save_interval > 0, a checkpoint is
// written every interval (and the caller typically writes the final one).
std::vector<CvaeEpochStats> train_cvae(CvaeModel& model,
                                       const std::vector<FeatureBundle>& data,
                                       const TrainOptions& opts, uint64_t seed,
                                       const std::string& save_path = "");

// Fraction of non-padded positions whose decoded argmax channel matches the
// input, decoding from the posterior mean.
double reconstruction_accuracy(const CvaeModel& model,
                               const std::vector<FeatureBundle>& data);

struct LatentReport {
  Eigen::VectorXd mu_mean;        // per-dimension mean of posterior means
  Eigen::VectorXd mu_var;         // per-dimension variance of posterior means
  Eigen::VectorXd sigma2_mean;    // per-dimension mean posterior variance
  Eigen::VectorXd aggregate_var;  // mu_var + sigma2_mean: total latent spread
  double pooled_mu_mean = 0;
  std::vector<double> hist_edges;   // shared bin edges over pooled mu values
  std::vector<size_t> hist_counts;
};

LatentReport latent_distribution_report(const CvaeModel& model,
                                        const std::vector<FeatureBundle>& data);

}  // namespace cmadiff
