// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "diffusion/diffusion.hpp"

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

void DiffusionConfig::validate() const {
  if (latent_dim < 1) fail(ErrorCode::Config, "diffusion.latent_dim must be positive");
  if (cond_dim < 1) fail(ErrorCode::Config, "diffusion.cond_dim must be positive");
  if (channels < 1) fail(ErrorCode::Config, "diffusion.channels must be positive");
  if (levels < 0) fail(ErrorCode::Config, "diffusion.levels must be >= 0");
  if (latent_dim % (1 << levels) != 0) {
    fail(ErrorCode::Config, "diffusion.latent_dim " + std::to_string(latent_dim) +
                                " is not divisible by 2^levels = " +
                                std::to_string(1 << levels));
  }
  if (time_dim < 2 || time_dim % 2 != 0) {
    fail(ErrorCode::Config, "diffusion.time_dim must be even and >= 2");
  }
  if (T < 1) fail(ErrorCode::Config, "diffusion.T must be >= 1");
  if (!(beta_start > 0) || !(beta_start <= beta_end) || !(beta_end < 1)) {
    fail(ErrorCode::Config, "diffusion schedule needs 0 < beta_start <= beta_end < 1");
  }
  if (schedule_kind != "linear") {
    fail(ErrorCode::Config, "unsupported schedule kind '" + schedule_kind + "'");
  }
}

namespace {

json config_to_json(const DiffusionConfig& c) {
  json j;
  j["model"] = "diffusion";
  j["latent_dim"] = c.latent_dim;
  j["cond_dim"] = c.cond_dim;
  j["channels"] = c.channels;
  j["levels"] = c.levels;
  j["time_dim"] = c.time_dim;
  j["T"] = c.T;
  j["beta_start"] = c.beta_start;
  j["beta_end"] = c.beta_end;
  j["schedule_kind"] = c.schedule_kind;
  j["seed"] = c.seed;
  return j;
}

DiffusionConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("checkpoint config is not valid JSON: ") + e.what());
  }
  DiffusionConfig c;
  c.latent_dim = j.value("latent_dim", c.latent_dim);
  c.cond_dim = j.value("cond_dim", c.cond_dim);
  c.channels = j.value("channels", c.channels);
  c.levels = j.value("levels", c.levels);
  c.time_dim = j.value("time_dim", c.time_dim);
  c.T = j.value("T", c.T);
  c.beta_start = j.value("beta_start", c.beta_start);
  c.beta_end = j.value("beta_end", c.beta_end);
  c.schedule_kind = j.value("schedule_kind", c.schedule_kind);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

// Transformer-style sinusoidal embedding of the integer step.
Eigen::RowVectorXd sinusoidal_time_embedding(int t, int dim) {
  Eigen::RowVectorXd emb(dim);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq =
        std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
    emb(2 * i) = std::sin(t * freq);
    emb(2 * i + 1) = std::cos(t * freq);
  }
  return emb;
}

}  // namespace

DiffusionModel::DiffusionModel(const DiffusionConfig& config) : cfg_(config) {
  cfg_.validate();
  schedule_ = make_schedule(cfg_.T, cfg_.beta_start, cfg_.beta_end, cfg_.schedule_kind);
  wire();
}

DiffusionModel::ResBlock DiffusionModel::make_res_block(const std::string& prefix, Rng& rng) {
  ResBlock b;
  const int c = cfg_.channels;
  b.ln1 = LayerNorm::create(store_, prefix + ".ln1", c);
  b.ln2 = LayerNorm::create(store_, prefix + ".ln2", c);
  b.conv1 = Conv1d::create(store_, prefix + ".conv1", c, c, 3, rng);
  b.conv2 = Conv1d::create(store_, prefix + ".conv2", c, c, 3, rng);
  b.time_proj = Linear::create(store_, prefix + ".time", cfg_.time_dim, c, rng);
  return b;
}

void DiffusionModel::wire() {
  Rng rng(cfg_.seed ^ 0xd1ff0501ULL);
  const int c = cfg_.channels;

  time_mlp1_ = Linear::create(store_, "time.mlp1", cfg_.time_dim, cfg_.time_dim, rng);
  time_mlp2_ = Linear::create(store_, "time.mlp2", cfg_.time_dim, cfg_.time_dim, rng);
  cond_adapter_ = Linear::create(store_, "cond.adapter", cfg_.cond_dim, cfg_.time_dim, rng);
  cond_token_ = Linear::create(store_, "cond.token", cfg_.cond_dim, c, rng);
  null_cond_ = store_.get_or_create("cond.null", 1, cfg_.cond_dim, [&] {
    return normal_init(1, cfg_.cond_dim, 0.02, rng);
  });

  lift_ = Conv1d::create(store_, "lift", 1, c, 3, rng);
  down_blocks_.clear();
  up_fuse_.clear();
  up_blocks_.clear();
  for (int l = 0; l < cfg_.levels; ++l) {
    down_blocks_.push_back(make_res_block("down" + std::to_string(l), rng));
  }
  mid_block1_ = make_res_block("mid.block1", rng);
  mid_self_ = AttentionBlock::create(store_, "mid.self", c, c, c, rng);
  mid_cross_ = AttentionBlock::create(store_, "mid.cross", c, c, c, rng);
  mid_block2_ = make_res_block("mid.block2", rng);
  for (int l = cfg_.levels - 1; l >= 0; --l) {
    up_fuse_.push_back(Conv1d::create(store_, "up" + std::to_string(l) + ".fuse", 2 * c, c, 3, rng));
    up_blocks_.push_back(make_res_block("up" + std::to_string(l), rng));
  }
  head_ln_ = LayerNorm::create(store_, "head.ln", c);
  head_ = Conv1d::create(store_, "head.conv", c, 1, 3, rng);
}

DiffusionModel DiffusionModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "diffusion") {
    fail(ErrorCode::Config,
         "checkpoint holds a '" + ckpt.kind + "' model, expected 'diffusion'");
  }
  DiffusionModel model(config_from_json(ckpt.config_json));
  model.store_.load_values(ckpt.arrays);
  return model;
}

Checkpoint DiffusionModel::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "diffusion";
  ckpt.config_json = config_to_json(cfg_).dump();
  ckpt.arrays = store_.values();
  return ckpt;
}

NodePtr DiffusionModel::apply_res_block(const ResBlock& block, const NodePtr& x,
                                        const NodePtr& temb) const {
  auto h = block.conv1(ad::gelu(block.ln1(x)));
  h = ad::add_rowvec(h, block.time_proj(temb));
  h = block.conv2(ad::gelu(block.ln2(h)));
  return ad::add(x, h);
}

NodePtr DiffusionModel::denoise_graph(const Eigen::VectorXd& z_t, int t,
                                      const std::optional<Eigen::VectorXd>& condition) const {
  if (z_t.size() != cfg_.latent_dim) {
    fail(ErrorCode::ShapeMismatch, "denoise: latent has dimension " +
                                       std::to_string(z_t.size()) + ", model expects " +
                                       std::to_string(cfg_.latent_dim));
  }
  if (t < 1 || t > cfg_.T) {
    fail(ErrorCode::InvalidArgument, "denoise: step " + std::to_string(t) + " outside [1, " +
                                         std::to_string(cfg_.T) + "]");
  }
  if (!z_t.allFinite()) fail(ErrorCode::Numeric, "denoise: latent contains non-finite values");

  NodePtr cond;
  if (condition.has_value()) {
    if (condition->size() != cfg_.cond_dim) {
      fail(ErrorCode::ShapeMismatch, "denoise: condition has dimension " +
                                         std::to_string(condition->size()) +
                                         ", model expects " + std::to_string(cfg_.cond_dim));
    }
    cond = ad::constant(condition->transpose());
  } else {
    cond = null_cond_;
  }

  auto sin_emb = ad::constant(sinusoidal_time_embedding(t, cfg_.time_dim));
  auto temb = time_mlp2_(ad::gelu(time_mlp1_(sin_emb)));
  temb = ad::add(temb, cond_adapter_(cond));  // 1 x time_dim

  auto h = lift_(ad::constant(z_t));  // m x channels
  std::vector<NodePtr> skips;
  for (const auto& block : down_blocks_) {
    h = apply_res_block(block, h, temb);
    skips.push_back(h);
    h = ad::downsample_rows2(h);
  }

  h = apply_res_block(mid_block1_, h, temb);
  h = ad::add(h, mid_self_(h, h));
  h = ad::add(h, mid_cross_(h, cond_token_(cond)));
  h = apply_res_block(mid_block2_, h, temb);

  for (size_t i = 0; i < up_blocks_.size(); ++i) {
    h = ad::upsample_rows2(h);
    h = up_fuse_[i](ad::concat_cols(h, skips[skips.size() - 1 - i]));
    h = apply_res_block(up_blocks_[i], h, temb);
  }

  return head_(ad::gelu(head_ln_(h)));  // m x 1
}

Eigen::VectorXd DiffusionModel::denoise_predict(
    const Eigen::VectorXd& z_t, int t, const std::optional<Eigen::VectorXd>& condition) const {
  return denoise_graph(z_t, t, condition)->value.col(0);
}

std::vector<Eigen::VectorXd> DiffusionModel::sample(
    const std::optional<Eigen::VectorXd>& condition, uint64_t seed, int count) const {
  Rng rng(seed);
  const DenoiseFn fn = [&](const Eigen::VectorXd& z, int t) {
    return denoise_predict(z, t, condition);
  };
  return sample_chains(fn, schedule_, cfg_.latent_dim, rng, count);
}

DiffusionBatchLoss diffusion_loss_graph(const DiffusionModel& model,
                                        const std::vector<DiffusionExample>& batch,
                                        Rng& rng) {
  if (batch.empty()) fail(ErrorCode::InvalidArgument, "diffusion loss needs a non-empty batch");
  const NoiseSchedule& schedule = model.schedule();
  NodePtr total;
  for (const auto& example : batch) {
    const int t = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(schedule.T))) + 1;
    const Eigen::VectorXd eps = rng.normal_vector(static_cast<int>(example.z0.size()));
    const Eigen::VectorXd z_t = forward_marginal(example.z0, t, schedule, eps);
    auto z0_hat = model.denoise_graph(z_t, t, example.condition);
    auto diff = ad::sub(z0_hat, ad::constant(example.z0));
    auto sq_norm = ad::sum_all(ad::mul(diff, diff));
    total = total ? ad::add(total, sq_norm) : sq_norm;
  }
  DiffusionBatchLoss out;
  out.loss = ad::scale(total, 1.0 / static_cast<double>(batch.size()));
  if (!std::isfinite(out.loss->value(0, 0))) {
    fail(ErrorCode::Numeric, "diffusion loss is non-finite");
  }
  return out;
}

double diffusion_loss(const DiffusionModel& model, const std::vector<DiffusionExample>& batch,
                      Rng& rng) {
  return diffusion_loss_graph(model, batch, rng).loss->value(0, 0);
}

std::vector<DiffusionEpochStats> train_diffusion(DiffusionModel& model,
                                                 const std::vector<DiffusionExample>& data,
                                                 const TrainOptions& opts, uint64_t seed,
                                                 const std::string& save_path) {
  if (data.empty()) fail(ErrorCode::InvalidArgument, "diffusion training needs a non-empty dataset");
  for (const auto& example : data) {
    if (example.z0.size() != model.config().latent_dim) {
      fail(ErrorCode::ShapeMismatch, "diffusion training example has latent dimension " +
                                         std::to_string(example.z0.size()) +
                                         ", model expects " +
                                         std::to_string(model.config().latent_dim));
    }
  }
  Adam adam(model.params(), AdamConfig{opts.lr, 0.9, 0.999, 1e-8});
  Rng order_rng(seed ^ 0xd1fff017ULL);
  Rng noise_rng(seed ^ 0xd1ff4e01ULL);
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});

  std::vector<DiffusionEpochStats> history;
  history.reserve(opts.epochs);
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    adam.set_lr(scheduled_lr(opts, epoch));
    order_rng.shuffle(order);
    double epoch_loss = 0;
    size_t batches = 0;
    for (size_t start = 0; start < order.size(); start += opts.batch_size) {
      const size_t count = std::min<size_t>(opts.batch_size, order.size() - start);
      std::vector<DiffusionExample> batch;
      batch.reserve(count);
      for (size_t b = 0; b < count; ++b) batch.push_back(data[order[start + b]]);
      auto loss = diffusion_loss_graph(model, batch, noise_rng);
      ad::backward(loss.loss);
      adam.step();
      epoch_loss += loss.loss->value(0, 0);
      ++batches;
    }
    DiffusionEpochStats stats;
    stats.epoch = epoch;
    stats.loss = epoch_loss / static_cast<double>(batches);
    stats.lr = adam.lr();
    history.push_back(stats);
    if (opts.verbose) {
      std::cerr << "[diffusion] epoch " << epoch << "/" << opts.epochs << " loss "
                << stats.loss << " lr " << stats.lr << "\n";
    }
    if (!save_path.empty() && opts.save_interval > 0 &&
        (epoch % opts.save_interval == 0 || epoch == opts.epochs)) {
      save_checkpoint(model.to_checkpoint(), save_path);
    }
  }
  return history;
}

}  // namespace cmadiff
