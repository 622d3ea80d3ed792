// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "cvae/cvae.hpp"
#include "grad_check.hpp"

using namespace cmadiff;
using cmadiff::testsupport::check_gradients;

namespace {

CvaeConfig tiny_config() {
  CvaeConfig config;
  config.latent_dim = 4;
  config.hidden_dim = 8;
  config.l_max = 8;
  config.kl_weight = 0.5;
  config.seed = 99;
  return config;
}

std::string random_sequence(Rng& rng, int length) {
  std::string s;
  for (int i = 0; i < length; ++i) {
    s.push_back(kAlphabet[static_cast<size_t>(rng.uniform_int(20))]);
  }
  return s;
}

}  // namespace

TEST_CASE("reparameterize identities") {
  Eigen::VectorXd mu(3), log_var(3), eps(3);
  mu << 0.5, -1.0, 2.0;
  eps << 0.3, 0.7, -0.2;
  log_var.setZero();
  // sigma = 1 -> mu + eps
  CHECK((reparameterize(mu, log_var, eps) - (mu + eps)).cwiseAbs().maxCoeff() < 1e-15);
  log_var << 1.7, -0.4, 0.9;
  // eps = 0 -> mu
  CHECK((reparameterize(mu, log_var, Eigen::VectorXd::Zero(3)) - mu).cwiseAbs().maxCoeff() <
        1e-15);
}

TEST_CASE("reparameterize Monte-Carlo moments match (mu, exp(log_var))") {
  Eigen::VectorXd mu(2), log_var(2);
  mu << 0.8, -0.3;
  log_var << 0.5, -1.0;
  Rng rng(123);
  const int n = 100000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(2), sum_sq = Eigen::VectorXd::Zero(2);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd z = reparameterize(mu, log_var, rng.normal_vector(2));
    sum += z;
    sum_sq += z.cwiseProduct(z);
  }
  const Eigen::VectorXd mean = sum / n;
  const Eigen::VectorXd var = sum_sq / n - mean.cwiseProduct(mean);
  for (int d = 0; d < 2; ++d) {
    const double sigma2 = std::exp(log_var[d]);
    const double se_mean = std::sqrt(sigma2 / n);
    // variance of the sample variance of a Gaussian is 2 sigma^4 / n
    const double se_var = std::sqrt(2.0 * sigma2 * sigma2 / n);
    CHECK(std::abs(mean[d] - mu[d]) < 3 * se_mean);
    CHECK(std::abs(var[d] - sigma2) < 3 * se_var);
  }
}

TEST_CASE("KL divergence closed forms") {
  CHECK(kl_divergence(Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(5)) == 0.0);
  // mu = ones, log_var = 0 -> d/2
  CHECK(kl_divergence(Eigen::VectorXd::Ones(6), Eigen::VectorXd::Zero(6)) ==
        doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("KL divergence matches a quadrature oracle per dimension") {
  // KL(N(mu, s^2) || N(0,1)) = integral q log(q/p), on a wide grid
  Eigen::VectorXd mu(1), log_var(1);
  mu << 0.7;
  log_var << -0.3;
  const double sigma = std::exp(0.5 * log_var[0]);
  const double lo = mu[0] - 12 * sigma, hi = mu[0] + 12 * sigma;
  const int steps = 200001;
  const double dx = (hi - lo) / (steps - 1);
  double integral = 0;
  for (int i = 0; i < steps; ++i) {
    const double x = lo + i * dx;
    const double q = std::exp(-0.5 * (x - mu[0]) * (x - mu[0]) / (sigma * sigma)) /
                     (sigma * std::sqrt(2 * M_PI));
    const double log_p = -0.5 * x * x - 0.5 * std::log(2 * M_PI);
    const double log_q = -0.5 * (x - mu[0]) * (x - mu[0]) / (sigma * sigma) -
                         std::log(sigma) - 0.5 * std::log(2 * M_PI);
    const double w = (i == 0 || i == steps - 1) ? 0.5 : 1.0;  // trapezoid
    integral += w * q * (log_q - log_p) * dx;
  }
  CHECK(kl_divergence(mu, log_var) == doctest::Approx(integral).epsilon(1e-6));
}

TEST_CASE("encoder and decoder basic contracts") {
  const auto table = load_property_table();
  CvaeModel model(tiny_config());
  Rng rng(7);
  const auto bundle = featurize(random_sequence(rng, 6), table, 8, /*normalized=*/true);

  SUBCASE("determinism") {
    const auto a = model.encode(bundle);
    const auto b = model.encode(bundle);
    CHECK((a.mu - b.mu).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.log_var - b.log_var).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd z = rng.normal_vector(4);
    CHECK((model.decode(z, bundle.global) - model.decode(z, bundle.global))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  SUBCASE("decoder logits are L_max x 21") {
    const auto logits = model.decode(rng.normal_vector(4), bundle.global);
    CHECK(logits.rows() == 8);
    CHECK(logits.cols() == 21);
  }
  SUBCASE("different sequences produce different posteriors") {
    const auto other = featurize(random_sequence(rng, 7), table, 8, /*normalized=*/true);
    const auto ea = model.encode(bundle);
    const auto eb = model.encode(other);
    CHECK((ea.mu - eb.mu).cwiseAbs().maxCoeff() > 0.0);
  }
  SUBCASE("changing global features with z fixed changes the logits") {
    const Eigen::VectorXd z = rng.normal_vector(4);
    Eigen::VectorXd other = bundle.global;
    other[0] += 1.0;
    const auto la = model.decode(z, bundle.global);
    const auto lb = model.decode(z, other);
    CHECK((la - lb).cwiseAbs().maxCoeff() > 0.0);
  }
  SUBCASE("log_var is clamped into [-10, 10]") {
    const auto enc = model.encode(bundle);
    CHECK(enc.log_var.maxCoeff() <= 10.0);
    CHECK(enc.log_var.minCoeff() >= -10.0);
  }
}

TEST_CASE("loss decomposition: beta scaling and positivity") {
  const auto table = load_property_table();
  CvaeModel model(tiny_config());
  Rng rng(8);
  const auto bundle = featurize(random_sequence(rng, 5), table, 8, /*normalized=*/true);
  const Eigen::VectorXd eps = rng.normal_vector(4);
  const auto l0 = model.loss_graph(bundle, eps, 0.0);
  CHECK(l0.total->value(0, 0) == doctest::Approx(l0.recon->value(0, 0)).epsilon(1e-12));
  CHECK(l0.recon->value(0, 0) > 0.0);
  const auto l1 = model.loss_graph(bundle, eps, 0.5);
  CHECK(l1.total->value(0, 0) ==
        doctest::Approx(l1.recon->value(0, 0) + 0.5 * l1.kl->value(0, 0)).epsilon(1e-12));
  CHECK(l1.kl->value(0, 0) >= 0.0);
}

TEST_CASE("cvae loss gradients match finite differences on a tiny config") {
  const auto table = load_property_table();
  CvaeModel model(tiny_config());
  Rng rng(9);
  const auto bundle = featurize(random_sequence(rng, 6), table, 8, /*normalized=*/true);
  const Eigen::VectorXd eps = rng.normal_vector(4);
  std::vector<ad::NodePtr> leaves;
  for (const auto& [name, node] : model.params().items()) leaves.push_back(node);
  const auto result = check_gradients(
      leaves, [&] { return model.loss_graph(bundle, eps, 0.5).total; });
  CHECK_MESSAGE(result.ok(), "failed " << result.failed << "/" << result.checked
                                       << ", worst rel " << result.worst_rel << " at "
                                       << result.worst_at);
}

TEST_CASE("seeded training is deterministic and reduces the loss") {
  const auto table = load_property_table();
  Rng rng(10);
  std::vector<FeatureBundle> data;
  for (int i = 0; i < 6; ++i) {
    data.push_back(featurize(random_sequence(rng, 4 + i % 3), table, 8, true));
  }
  TrainOptions opts;
  opts.epochs = 8;
  opts.batch_size = 3;
  opts.lr = 1e-3;
  CvaeModel a(tiny_config());
  CvaeModel b(tiny_config());
  const auto stats_a = train_cvae(a, data, opts, 42);
  const auto stats_b = train_cvae(b, data, opts, 42);
  REQUIRE(stats_a.size() == 8);
  CHECK(stats_a[0].total == stats_b[0].total);
  CHECK(stats_a.back().total == stats_b.back().total);
  CHECK(stats_a.back().total < stats_a.front().total);
}

TEST_CASE("checkpoint round-trip preserves behavior and rejects mismatches") {
  const auto table = load_property_table();
  CvaeModel model(tiny_config());
  Rng rng(11);
  const auto bundle = featurize(random_sequence(rng, 6), table, 8, true);
  const auto before = model.encode(bundle);

  const std::string path = "cvae_roundtrip.ckpt";
  save_checkpoint(model.to_checkpoint(), path);
  const CvaeModel loaded = CvaeModel::from_checkpoint(load_checkpoint(path, "cvae"));
  const auto after = loaded.encode(bundle);
  CHECK((before.mu - after.mu).cwiseAbs().maxCoeff() == 0.0);
  CHECK((before.log_var - after.log_var).cwiseAbs().maxCoeff() == 0.0);

  auto ckpt = load_checkpoint(path);
  ckpt.kind = "aligner";
  const std::string wrong = "cvae_wrongkind.ckpt";
  save_checkpoint(ckpt, wrong);
  CHECK_THROWS_AS(CvaeModel::from_checkpoint(load_checkpoint(wrong)), Error);
  std::remove(path.c_str());
  std::remove(wrong.c_str());
}

TEST_CASE("config validation names bad fields") {
  CvaeConfig config = tiny_config();
  config.latent_dim = 0;
  CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("latent_dim"), Error);
  config = tiny_config();
  config.kl_weight = -0.1;
  CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("kl_weight"), Error);
}

TEST_CASE("latent report is deterministic and shapes line up") {
  const auto table = load_property_table();
  CvaeModel model(tiny_config());
  Rng rng(12);
  std::vector<FeatureBundle> data;
  for (int i = 0; i < 5; ++i) {
    data.push_back(featurize(random_sequence(rng, 6), table, 8, true));
  }
  const auto r1 = latent_distribution_report(model, data);
  const auto r2 = latent_distribution_report(model, data);
  CHECK(r1.mu_mean.size() == 4);
  CHECK(r1.aggregate_var.size() == 4);
  CHECK((r1.mu_mean - r2.mu_mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r1.aggregate_var - (r1.mu_var + r1.sigma2_mean)).cwiseAbs().maxCoeff() < 1e-15);
}
