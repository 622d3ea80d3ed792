// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "cvae/cvae.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include <json.hpp>

#include "core/error.hpp"
#include "nn/adam.hpp"

namespace cmadiff {

using ad::NodePtr;
using nlohmann::json;

void CvaeConfig::validate() const {
  if (latent_dim < 1) fail(ErrorCode::Config, "cvae.latent_dim must be positive");
  if (hidden_dim < 1) fail(ErrorCode::Config, "cvae.hidden_dim must be positive");
  if (feature_dim < 1) fail(ErrorCode::Config, "cvae.feature_dim must be positive");
  if (l_max < 1) fail(ErrorCode::Config, "cvae.l_max must be positive");
  if (encoder_depth < 1) fail(ErrorCode::Config, "cvae.encoder_depth must be positive");
  if (decoder_depth < 1) fail(ErrorCode::Config, "cvae.decoder_depth must be positive");
  if (kl_weight < 0) fail(ErrorCode::Config, "cvae.kl_weight must be >= 0");
}

Eigen::VectorXd reparameterize(const Eigen::VectorXd& mu, const Eigen::VectorXd& log_var,
                               const Eigen::VectorXd& eps) {
  if (mu.size() != log_var.size() || mu.size() != eps.size()) {
    fail(ErrorCode::ShapeMismatch, "reparameterize: mu/log_var/eps sizes differ");
  }
  return (mu.array() + (0.5 * log_var.array()).exp() * eps.array()).matrix();
}

double kl_divergence(const Eigen::VectorXd& mu, const Eigen::VectorXd& log_var) {
  if (mu.size() != log_var.size()) {
    fail(ErrorCode::ShapeMismatch, "kl_divergence: mu and log_var sizes differ");
  }
  return 0.5 * (mu.array().square() + log_var.array().exp() - 1.0 - log_var.array()).sum();
}

namespace {

json config_to_json(const CvaeConfig& c) {
  json j;
  j["model"] = "cvae";
  j["latent_dim"] = c.latent_dim;
  j["hidden_dim"] = c.hidden_dim;
  j["feature_dim"] = c.feature_dim;
  j["l_max"] = c.l_max;
  j["encoder_depth"] = c.encoder_depth;
  j["decoder_depth"] = c.decoder_depth;
  j["kl_weight"] = c.kl_weight;
  j["cross_entropy_recon"] = c.cross_entropy_recon;
  j["seed"] = c.seed;
  return j;
}

CvaeConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("checkpoint config is not valid JSON: ") + e.what());
  }
  CvaeConfig c;
  c.latent_dim = j.value("latent_dim", c.latent_dim);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.l_max = j.value("l_max", c.l_max);
  c.encoder_depth = j.value("encoder_depth", c.encoder_depth);
  c.decoder_depth = j.value("decoder_depth", c.decoder_depth);
  c.kl_weight = j.value("kl_weight", c.kl_weight);
  c.cross_entropy_recon = j.value("cross_entropy_recon", c.cross_entropy_recon);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

// Log-softmax per row with the max subtracted as a value-level constant; the
// shift cancels in the gradient, so this is exact.
NodePtr log_softmax_rows(const NodePtr& x) {
  Eigen::VectorXd row_max = x->value.rowwise().maxCoeff();
  auto shifted =
      ad::sub(x, ad::constant(row_max * Eigen::RowVectorXd::Ones(x->value.cols())));
  auto lse = ad::log_(ad::row_sum(ad::exp_(shifted)));  // n x 1
  return ad::sub(shifted,
                 ad::matmul(lse, ad::constant(ad::Mat::Ones(1, x->value.cols()))));
}

}  // namespace

CvaeModel::CvaeModel(const CvaeConfig& config) : cfg_(config) {
  cfg_.validate();
  wire();
}

void CvaeModel::wire() {
  Rng rng(cfg_.seed ^ 0xc7ae0001ULL);
  const int h = cfg_.hidden_dim;
  const int m = cfg_.latent_dim;
  const int k = cfg_.feature_dim;

  enc_seq_lift_ = Conv1d::create(store_, "enc.seq.lift", kOneHotChannels, h, 5, rng);
  enc_seq_ln_ = LayerNorm::create(store_, "enc.seq.ln", h);
  enc_seq_res_ = Conv1d::create(store_, "enc.seq.res", h, h, 3, rng);
  enc_feat_lift_ = Conv1d::create(store_, "enc.feat.lift", k, h, 5, rng);
  enc_feat_ln_ = LayerNorm::create(store_, "enc.feat.ln", h);
  enc_feat_res_ = Conv1d::create(store_, "enc.feat.res", h, h, 3, rng);
  enc_pos_ = store_.get_or_create("enc.pos", cfg_.l_max, h,
                                  [&] { return normal_init(cfg_.l_max, h, 0.02, rng); });
  enc_cross_ = AttentionBlock::create(store_, "enc.cross", h, h, h, rng);
  enc_blocks_.clear();
  for (int i = 0; i < cfg_.encoder_depth; ++i) {
    enc_blocks_.push_back(
        TransformerBlock::create(store_, "enc.block" + std::to_string(i), h, 2 * h, rng));
  }
  head_mu_ = Linear::create(store_, "enc.head_mu", h, m, rng);
  head_logvar_ = Linear::create(store_, "enc.head_logvar", h, m, rng);

  dec_seed_ = Linear::create(store_, "dec.seed", m + k, h, rng);
  dec_mem_z_ = Linear::create(store_, "dec.mem_z", m, h, rng);
  dec_mem_f_ = Linear::create(store_, "dec.mem_f", k, h, rng);
  dec_pos_ = store_.get_or_create("dec.pos", cfg_.l_max, h,
                                  [&] { return normal_init(cfg_.l_max, h, 0.02, rng); });
  dec_blocks_.clear();
  for (int i = 0; i < cfg_.decoder_depth; ++i) {
    const std::string p = "dec.block" + std::to_string(i);
    DecoderBlock b;
    b.ln1 = LayerNorm::create(store_, p + ".ln1", h);
    b.ln2 = LayerNorm::create(store_, p + ".ln2", h);
    b.ln3 = LayerNorm::create(store_, p + ".ln3", h);
    b.self_attn = AttentionBlock::create(store_, p + ".self", h, h, h, rng);
    b.cross_attn = AttentionBlock::create(store_, p + ".cross", h, h, h, rng);
    b.ff1 = Linear::create(store_, p + ".ff1", h, 2 * h, rng);
    b.ff2 = Linear::create(store_, p + ".ff2", 2 * h, h, rng);
    dec_blocks_.push_back(std::move(b));
  }
  dec_out_ln_ = LayerNorm::create(store_, "dec.out_ln", h);
  dec_out_ = Conv1d::create(store_, "dec.out", h, kOneHotChannels, 3, rng);
}

CvaeModel CvaeModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "cvae") {
    fail(ErrorCode::Config, "checkpoint holds a '" + ckpt.kind + "' model, expected 'cvae'");
  }
  CvaeModel model(config_from_json(ckpt.config_json));
  model.store_.load_values(ckpt.arrays);
  return model;
}

Checkpoint CvaeModel::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "cvae";
  ckpt.config_json = config_to_json(cfg_).dump();
  ckpt.arrays = store_.values();
  return ckpt;
}

CvaeModel::EncodeNodes CvaeModel::encode_graph(const FeatureBundle& bundle) const {
  if (bundle.one_hot.rows() != cfg_.l_max || bundle.one_hot.cols() != kOneHotChannels) {
    fail(ErrorCode::ShapeMismatch,
         "encode: one_hot is " + std::to_string(bundle.one_hot.rows()) + "x" +
             std::to_string(bundle.one_hot.cols()) + ", model expects " +
             std::to_string(cfg_.l_max) + "x" + std::to_string(kOneHotChannels));
  }
  if (bundle.local.cols() != cfg_.feature_dim) {
    fail(ErrorCode::ShapeMismatch,
         "encode: local features have dimension " + std::to_string(bundle.local.cols()) +
             ", model expects " + std::to_string(cfg_.feature_dim));
  }
  if (bundle.length < 1 || bundle.length > cfg_.l_max) {
    fail(ErrorCode::InvalidArgument,
         "encode: length " + std::to_string(bundle.length) + " outside [1, " +
             std::to_string(cfg_.l_max) + "]");
  }

  auto one_hot = ad::constant(bundle.one_hot);
  auto local = ad::constant(bundle.local);

  auto hs = ad::gelu(enc_seq_lift_(one_hot));
  hs = ad::add(hs, enc_seq_res_(ad::gelu(enc_seq_ln_(hs))));
  auto hf = ad::gelu(enc_feat_lift_(local));
  hf = ad::add(hf, enc_feat_res_(ad::gelu(enc_feat_ln_(hf))));

  hs = ad::add(hs, enc_pos_);
  hf = ad::add(hf, enc_pos_);

  auto fused = ad::add(hs, enc_cross_(hs, hf));
  for (const auto& block : enc_blocks_) fused = block(fused);

  // mean over the true length only
  ad::Mat mask = ad::Mat::Zero(1, cfg_.l_max);
  mask.leftCols(bundle.length).setConstant(1.0 / bundle.length);
  auto pooled = ad::matmul(ad::constant(mask), fused);  // 1 x h

  EncodeNodes out;
  out.mu = head_mu_(pooled);
  out.log_var = ad::clamp(head_logvar_(pooled), -10.0, 10.0);
  return out;
}

NodePtr CvaeModel::decode_graph(const NodePtr& z, const Eigen::VectorXd& global_feats) const {
  if (z->value.rows() != 1 || z->value.cols() != cfg_.latent_dim) {
    fail(ErrorCode::ShapeMismatch,
         "decode: z has dimension " + std::to_string(z->value.size()) + ", model expects " +
             std::to_string(cfg_.latent_dim));
  }
  if (global_feats.size() != cfg_.feature_dim) {
    fail(ErrorCode::ShapeMismatch,
         "decode: global features have dimension " + std::to_string(global_feats.size()) +
             ", model expects " + std::to_string(cfg_.feature_dim));
  }
  auto f = ad::constant(global_feats.transpose());  // 1 x k

  auto seed_tok = dec_seed_(ad::concat_cols(z, f));                            // 1 x h
  auto h = ad::matmul(ad::constant(ad::Mat::Ones(cfg_.l_max, 1)), seed_tok);   // L x h
  h = ad::add(h, dec_pos_);

  auto memory = ad::concat_rows(dec_mem_z_(z), dec_mem_f_(f));  // 2 x h

  for (const auto& block : dec_blocks_) {
    auto n1 = block.ln1(h);
    h = ad::add(h, block.self_attn(n1, n1));
    h = ad::add(h, block.cross_attn(block.ln2(h), memory));
    h = ad::add(h, block.ff2(ad::gelu(block.ff1(block.ln3(h)))));
  }
  return dec_out_(ad::gelu(dec_out_ln_(h)));  // L x 21
}

CvaeModel::LossNodes CvaeModel::loss_graph(const FeatureBundle& bundle,
                                           const Eigen::VectorXd& eps, double beta) const {
  if (eps.size() != cfg_.latent_dim) {
    fail(ErrorCode::ShapeMismatch, "loss: eps has dimension " + std::to_string(eps.size()) +
                                       ", model expects " + std::to_string(cfg_.latent_dim));
  }
  auto enc = encode_graph(bundle);
  auto sigma = ad::exp_(ad::scale(enc.log_var, 0.5));
  auto z = ad::add(enc.mu, ad::mul(sigma, ad::constant(eps.transpose())));

  auto logits = decode_graph(z, bundle.global);
  auto region = ad::slice_rows(logits, 0, bundle.length);
  auto target = ad::constant(ad::Mat(bundle.one_hot.topRows(bundle.length)));

  NodePtr recon;
  if (cfg_.cross_entropy_recon) {
    recon = ad::scale(ad::sum_all(ad::mul(log_softmax_rows(region), target)), -1.0);
  } else {
    auto diff = ad::sub(region, target);
    recon = ad::sum_all(ad::mul(diff, diff));
  }

  auto kl = ad::scale(
      ad::sum_all(ad::sub(ad::add(ad::mul(enc.mu, enc.mu), ad::exp_(enc.log_var)),
                          ad::add_scalar(enc.log_var, 1.0))),
      0.5);

  LossNodes out;
  out.recon = recon;
  out.kl = kl;
  out.total = ad::add(recon, ad::scale(kl, beta));
  return out;
}

EncoderOutput CvaeModel::encode(const FeatureBundle& bundle) const {
  auto nodes = encode_graph(bundle);
  EncoderOutput out;
  out.mu = nodes.mu->value.row(0).transpose();
  out.log_var = nodes.log_var->value.row(0).transpose();
  if (!out.mu.allFinite() || !out.log_var.allFinite()) {
    fail(ErrorCode::Numeric, "encode produced non-finite outputs");
  }
  return out;
}

Eigen::MatrixXd CvaeModel::decode(const Eigen::VectorXd& z,
                                  const Eigen::VectorXd& global_feats) const {
  auto logits = decode_graph(ad::constant(z.transpose()), global_feats);
  if (!logits->value.allFinite()) fail(ErrorCode::Numeric, "decode produced non-finite logits");
  return logits->value;
}

std::vector<CvaeEpochStats> train_cvae(CvaeModel& model,
                                       const std::vector<FeatureBundle>& data,
                                       const TrainOptions& opts, uint64_t seed,
                                       const std::string& save_path) {
  if (data.empty()) fail(ErrorCode::InvalidArgument, "train_cvae: dataset is empty");

  Adam adam(model.params(), {opts.lr});
  Rng rng(seed ^ 0x7261696eULL);
  const double beta = model.config().kl_weight;
  const int m = model.config().latent_dim;

  std::vector<CvaeEpochStats> history;
  std::vector<size_t> indices(data.size());
  std::iota(indices.begin(), indices.end(), 0);

  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    adam.set_lr(scheduled_lr(opts, epoch));
    rng.shuffle(indices);

    double sum_total = 0, sum_recon = 0, sum_kl = 0;
    size_t seen = 0;
    for (size_t start = 0; start < indices.size(); start += opts.batch_size) {
      const size_t end = std::min(indices.size(), start + opts.batch_size);
      NodePtr batch_total, batch_recon, batch_kl;
      for (size_t i = start; i < end; ++i) {
        auto terms = model.loss_graph(data[indices[i]], rng.normal_vector(m), beta);
        batch_total = batch_total ? ad::add(batch_total, terms.total) : terms.total;
        batch_recon = batch_recon ? ad::add(batch_recon, terms.recon) : terms.recon;
        batch_kl = batch_kl ? ad::add(batch_kl, terms.kl) : terms.kl;
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      auto objective = ad::scale(batch_total, inv);
      if (!std::isfinite(objective->value(0, 0))) {
        fail(ErrorCode::Numeric,
             "training diverged: non-finite loss at epoch " + std::to_string(epoch));
      }
      ad::backward(objective);
      adam.step();

      sum_total += batch_total->value(0, 0);
      sum_recon += batch_recon->value(0, 0);
      sum_kl += batch_kl->value(0, 0);
      seen += end - start;
    }

    CvaeEpochStats stats;
    stats.epoch = epoch;
    stats.total = sum_total / static_cast<double>(seen);
    stats.recon = sum_recon / static_cast<double>(seen);
    stats.kl = sum_kl / static_cast<double>(seen);
    stats.lr = adam.lr();
    history.push_back(stats);

    if (opts.verbose) {
      std::cerr << "[cvae] epoch " << epoch << "/" << opts.epochs << " total=" << stats.total
                << " recon=" << stats.recon << " kl=" << stats.kl << "\n";
    }
    if (!save_path.empty() && opts.save_interval > 0 && epoch % opts.save_interval == 0) {
      save_checkpoint(model.to_checkpoint(), save_path);
    }
  }
  return history;
}

double reconstruction_accuracy(const CvaeModel& model,
                               const std::vector<FeatureBundle>& data) {
  size_t correct = 0, total = 0;
  for (const auto& bundle : data) {
    const auto enc = model.encode(bundle);
    const Eigen::MatrixXd logits = model.decode(enc.mu, bundle.global);
    for (int i = 0; i < bundle.length; ++i) {
      Eigen::Index pred;
      logits.row(i).maxCoeff(&pred);
      Eigen::Index truth;
      bundle.one_hot.row(i).maxCoeff(&truth);
      correct += (pred == truth);
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

LatentReport latent_distribution_report(const CvaeModel& model,
                                        const std::vector<FeatureBundle>& data) {
  if (data.empty()) fail(ErrorCode::InvalidArgument, "latent report: dataset is empty");
  const int m = model.config().latent_dim;
  const auto n = static_cast<double>(data.size());

  Eigen::MatrixXd mus(static_cast<Eigen::Index>(data.size()), m);
  Eigen::MatrixXd sigma2(static_cast<Eigen::Index>(data.size()), m);
  for (size_t i = 0; i < data.size(); ++i) {
    const auto enc = model.encode(data[i]);
    mus.row(static_cast<Eigen::Index>(i)) = enc.mu.transpose();
    sigma2.row(static_cast<Eigen::Index>(i)) = enc.log_var.array().exp().matrix().transpose();
  }

  LatentReport rep;
  rep.mu_mean = mus.colwise().mean().transpose();
  Eigen::MatrixXd centered = mus.rowwise() - rep.mu_mean.transpose();
  rep.mu_var = (centered.array().square().colwise().sum() / n).matrix().transpose();
  rep.sigma2_mean = sigma2.colwise().mean().transpose();
  rep.aggregate_var = rep.mu_var + rep.sigma2_mean;
  rep.pooled_mu_mean = mus.mean();

  constexpr int kBins = 32;
  constexpr double kLo = -4.0, kHi = 4.0;
  rep.hist_edges.resize(kBins + 1);
  rep.hist_counts.assign(kBins, 0);
  for (int b = 0; b <= kBins; ++b) rep.hist_edges[b] = kLo + (kHi - kLo) * b / kBins;
  for (Eigen::Index i = 0; i < mus.size(); ++i) {
    const double v = mus.data()[i];
    int b = static_cast<int>(std::floor((v - kLo) / (kHi - kLo) * kBins));
    b = std::clamp(b, 0, kBins - 1);
    rep.hist_counts[static_cast<size_t>(b)]++;
  }
  return rep;
}

}  // namespace cmadiff
