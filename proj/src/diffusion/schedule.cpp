// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "diffusion/schedule.hpp"

#include <cmath>

#include "core/error.hpp"

namespace cmadiff {

namespace {

void check_step(int t, int lo, int hi, const char* what) {
  if (t < lo || t > hi) {
    fail(ErrorCode::InvalidArgument, std::string(what) + ": step " + std::to_string(t) +
                                         " outside [" + std::to_string(lo) + ", " +
                                         std::to_string(hi) + "]");
  }
}

void check_dim(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const char* what) {
  if (a.size() != b.size()) {
    fail(ErrorCode::ShapeMismatch, std::string(what) + ": vector sizes differ (" +
                                       std::to_string(a.size()) + " vs " +
                                       std::to_string(b.size()) + ")");
  }
}

}  // namespace

double NoiseSchedule::beta_at(int t) const {
  check_step(t, 1, T, "beta");
  return beta(t - 1);
}

double NoiseSchedule::alpha_at(int t) const {
  check_step(t, 1, T, "alpha");
  return alpha(t - 1);
}

double NoiseSchedule::alpha_bar_at(int t) const {
  check_step(t, 0, T, "alpha_bar");
  return t == 0 ? 1.0 : alpha_bar(t - 1);
}

NoiseSchedule make_schedule(int T, double beta_start, double beta_end,
                            const std::string& kind) {
  if (T < 1) fail(ErrorCode::InvalidArgument, "schedule needs T >= 1");
  if (!(beta_start > 0) || !(beta_start <= beta_end) || !(beta_end < 1)) {
    fail(ErrorCode::InvalidArgument, "schedule needs 0 < beta_start <= beta_end < 1");
  }
  if (kind != "linear") {
    fail(ErrorCode::InvalidArgument, "unsupported schedule kind '" + kind + "'");
  }
  NoiseSchedule s;
  s.T = T;
  s.beta.resize(T);
  if (T == 1) {
    s.beta(0) = beta_start;
  } else {
    for (int i = 0; i < T; ++i) {
      s.beta(i) = beta_start + (beta_end - beta_start) * i / static_cast<double>(T - 1);
    }
  }
  s.alpha = 1.0 - s.beta.array();
  s.alpha_bar.resize(T);
  double prod = 1.0;
  for (int i = 0; i < T; ++i) {
    prod *= s.alpha(i);
    s.alpha_bar(i) = prod;
  }
  return s;
}

Eigen::VectorXd forward_step(const Eigen::VectorXd& z_prev, int t,
                             const NoiseSchedule& schedule, const Eigen::VectorXd& eps) {
  check_dim(z_prev, eps, "forward_step");
  const double a = schedule.alpha_at(t);
  return std::sqrt(a) * z_prev + std::sqrt(1.0 - a) * eps;
}

Eigen::VectorXd forward_marginal(const Eigen::VectorXd& z_0, int t,
                                 const NoiseSchedule& schedule, const Eigen::VectorXd& eps) {
  check_dim(z_0, eps, "forward_marginal");
  check_step(t, 1, schedule.T, "forward_marginal");
  const double ab = schedule.alpha_bar_at(t);
  return std::sqrt(ab) * z_0 + std::sqrt(1.0 - ab) * eps;
}

Eigen::VectorXd posterior_step(const Eigen::VectorXd& z_t, const Eigen::VectorXd& z0_hat,
                               int t, const NoiseSchedule& schedule,
                               const Eigen::VectorXd& noise) {
  if (t == 0) fail(ErrorCode::InvalidArgument, "posterior step undefined at t = 0");
  check_step(t, 1, schedule.T, "posterior_step");
  check_dim(z_t, z0_hat, "posterior_step");
  check_dim(z_t, noise, "posterior_step");
  const double beta_t = schedule.beta_at(t);
  const double alpha_t = schedule.alpha_at(t);
  const double ab_t = schedule.alpha_bar_at(t);
  const double ab_prev = schedule.alpha_bar_at(t - 1);
  const double coef_z0 = std::sqrt(ab_prev) * beta_t / (1.0 - ab_t);
  const double coef_zt = std::sqrt(alpha_t) * (1.0 - ab_prev) / (1.0 - ab_t);
  const double var = (1.0 - ab_prev) / (1.0 - ab_t) * beta_t;
  Eigen::VectorXd out = coef_z0 * z0_hat + coef_zt * z_t;
  if (t > 1) out += std::sqrt(var) * noise;
  return out;
}

std::vector<Eigen::VectorXd> sample_chains(const DenoiseFn& denoise,
                                           const NoiseSchedule& schedule, int dim,
                                           Rng& rng, int count) {
  if (dim < 1) fail(ErrorCode::InvalidArgument, "latent dimension must be positive");
  if (count < 0) fail(ErrorCode::InvalidArgument, "chain count must be >= 0");
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int c = 0; c < count; ++c) {
    Rng chain = rng.derive(static_cast<uint64_t>(c));
    Eigen::VectorXd z = chain.normal_vector(dim);
    for (int t = schedule.T; t >= 1; --t) {
      const Eigen::VectorXd z0_hat = denoise(z, t);
      const Eigen::VectorXd noise =
          t > 1 ? Eigen::VectorXd(chain.normal_vector(dim)) : Eigen::VectorXd::Zero(dim);
      z = posterior_step(z, z0_hat, t, schedule, noise);
    }
    out.push_back(std::move(z));
  }
  return out;
}

}  // namespace cmadiff
