// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "core/rng.hpp"

namespace cmadiff {

// Variance schedule of the forward noising chain. Step indices are 1-based
// (t = 1..T); index 0 denotes the clean data, where the cumulative product
// alpha_bar is defined to be 1.
struct NoiseSchedule {
  int T = 0;
  Eigen::VectorXd beta;       // T entries in (0,1)
  Eigen::VectorXd alpha;      // 1 - beta
  Eigen::VectorXd alpha_bar;  // cumulative products of alpha

  double beta_at(int t) const;       // t in [1, T]
  double alpha_at(int t) const;      // t in [1, T]
  double alpha_bar_at(int t) const;  // t in [0, T]; alpha_bar_at(0) == 1
};

// Linear spacing from beta_start to beta_end over T steps (the only supported
// kind). T = 1 uses beta_start alone.
NoiseSchedule make_schedule(int T, double beta_start = 1e-4, double beta_end = 0.02,
                            const std::string& kind = "linear");

// One forward noising step: sqrt(alpha_t) * z_prev + sqrt(1 - alpha_t) * eps.
Eigen::VectorXd forward_step(const Eigen::VectorXd& z_prev, int t,
                             const NoiseSchedule& schedule, const Eigen::VectorXd& eps);

// Closed-form marginal of t composed steps:
// sqrt(alpha_bar_t) * z_0 + sqrt(1 - alpha_bar_t) * eps.
Eigen::VectorXd forward_marginal(const Eigen::VectorXd& z_0, int t,
                                 const NoiseSchedule& schedule, const Eigen::VectorXd& eps);

// One reverse step from the Gaussian posterior q(z_{t-1} | z_t, z_0 = z0_hat):
// mean mixes z0_hat and z_t with the closed-form coefficients, variance is the
// posterior variance beta_tilde_t; the noise term is dropped at t = 1 so the
// final step is deterministic. t = 0 is an error (nothing precedes z_0).
Eigen::VectorXd posterior_step(const Eigen::VectorXd& z_t, const Eigen::VectorXd& z0_hat,
                               int t, const NoiseSchedule& schedule,
                               const Eigen::VectorXd& noise);

// Clean-latent predictor plugged into the reverse chain; lets tests drive the
// sampler with an oracle in place of a trained network.
using DenoiseFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& z_t, int t)>;

// Full reverse pass: start each chain from standard-normal z_T and apply
// posterior_step for t = T..1. Chains use independent substreams derived from
// rng, so results are deterministic given the seed and independent of count.
std::vector<Eigen::VectorXd> sample_chains(const DenoiseFn& denoise,
                                           const NoiseSchedule& schedule, int dim,
                                           Rng& rng, int count);

}  // namespace cmadiff
