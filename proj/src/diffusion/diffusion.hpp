// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "diffusion/schedule.hpp"
#include "nn/checkpoint.hpp"
#include "nn/layers.hpp"
#include "nn/train_options.hpp"

namespace cmadiff {

struct DiffusionConfig {
  int latent_dim = 32;  // m; must divide by 2^levels
  int cond_dim = 64;    // width of the aligned condition vector
  int channels = 32;    // U-Net channel width
  int levels = 2;       // down/upsampling stages
  int time_dim = 64;    // sinusoidal embedding width; even

  int T = 100;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  std::string schedule_kind = "linear";

  uint64_t seed = 0;

  void validate() const;
};

// One training example: a clean latent and, optionally, the aligned condition
// it was produced under. Unconditional examples train the learned null token.
struct DiffusionExample {
  Eigen::VectorXd z0;
  std::optional<Eigen::VectorXd> condition;
};

// DDPM over CVAE latents. The denoiser is a 1D U-Net that treats the latent
// as a length-m single-channel signal: residual conv blocks with the time
// embedding injected per block, down/upsampling between levels, and a
// bottleneck with self-attention plus cross-attention to the condition token.
class DiffusionModel {
 public:
  explicit DiffusionModel(const DiffusionConfig& config);

  DiffusionModel(const DiffusionModel&) = delete;
  DiffusionModel& operator=(const DiffusionModel&) = delete;
  DiffusionModel(DiffusionModel&&) = default;
  DiffusionModel& operator=(DiffusionModel&&) = default;

  static DiffusionModel from_checkpoint(const Checkpoint& ckpt);
  Checkpoint to_checkpoint() const;

  const DiffusionConfig& config() const { return cfg_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  // Differentiable denoiser pass; z_t enters as a constant. condition = null
  // uses the learned null token.
  ad::NodePtr denoise_graph(const Eigen::VectorXd& z_t, int t,
                            const std::optional<Eigen::VectorXd>& condition) const;

  // Value-level clean-latent prediction; deterministic for fixed parameters.
  Eigen::VectorXd denoise_predict(const Eigen::VectorXd& z_t, int t,
                                  const std::optional<Eigen::VectorXd>& condition) const;

  // Reverse chain from standard-normal z_T; deterministic given seed, and
  // chain c of a larger count equals chain c of a smaller one.
  std::vector<Eigen::VectorXd> sample(const std::optional<Eigen::VectorXd>& condition,
                                      uint64_t seed, int count) const;

 private:
  void wire();

  DiffusionConfig cfg_;
  NoiseSchedule schedule_;
  ParamStore store_;

  struct ResBlock {
    LayerNorm ln1, ln2;
    Conv1d conv1, conv2;
    Linear time_proj;
  };
  ResBlock make_res_block(const std::string& prefix, Rng& rng);
  ad::NodePtr apply_res_block(const ResBlock& block, const ad::NodePtr& x,
                              const ad::NodePtr& temb) const;

  Linear time_mlp1_, time_mlp2_;
  Linear cond_adapter_;  // condition -> time-embedding stream
  Linear cond_token_;    // condition -> bottleneck cross-attention token
  ad::NodePtr null_cond_;
  Conv1d lift_;
  std::vector<ResBlock> down_blocks_;
  ResBlock mid_block1_, mid_block2_;
  AttentionBlock mid_self_, mid_cross_;
  std::vector<Conv1d> up_fuse_;
  std::vector<ResBlock> up_blocks_;
  LayerNorm head_ln_;
  Conv1d head_;
};

struct DiffusionBatchLoss {
  ad::NodePtr loss;  // 1x1: mean over the batch of |z0 - z0_hat|^2
};

// Draws t uniformly in [1, T] and eps per example, noises via the closed-form
// marginal, and penalizes the squared error of the clean-latent prediction.
DiffusionBatchLoss diffusion_loss_graph(const DiffusionModel& model,
                                        const std::vector<DiffusionExample>& batch,
                                        Rng& rng);

double diffusion_loss(const DiffusionModel& model,
                      const std::vector<DiffusionExample>& batch, Rng& rng);

struct DiffusionEpochStats {
  int epoch = 0;
  double loss = 0;
  double lr = 0;
};

std::vector<DiffusionEpochStats> train_diffusion(DiffusionModel& model,
                                                 const std::vector<DiffusionExample>& data,
                                                 const TrainOptions& opts, uint64_t seed,
                                                 const std::string& save_path = "");

}  // namespace cmadiff
