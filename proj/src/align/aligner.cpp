// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "align/aligner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "core/digest.hpp"
#include "core/error.hpp"
#include "nn/adam.hpp"

namespace cmadiff {

using ad::NodePtr;
using nlohmann::json;

void AlignerConfig::validate() const {
  if (text_dim < 1) fail(ErrorCode::Config, "aligner.text_dim must be positive");
  if (hidden_dim < 1) fail(ErrorCode::Config, "aligner.hidden_dim must be positive");
  if (shared_dim < 1) fail(ErrorCode::Config, "aligner.shared_dim must be positive");
  if (feature_dim < 1) fail(ErrorCode::Config, "aligner.feature_dim must be positive");
  if (vocab_buckets < 1) fail(ErrorCode::Config, "aligner.vocab_buckets must be positive");
  if (temp_min <= 0 || temp_min > temp_max) {
    fail(ErrorCode::Config, "aligner temperature bounds need 0 < temp_min <= temp_max");
  }
  if (init_temperature < temp_min || init_temperature > temp_max) {
    fail(ErrorCode::Config, "aligner.init_temperature lies outside [temp_min, temp_max]");
  }
  if (hard_negatives && hard_negative_k < 1) {
    fail(ErrorCode::Config, "aligner.hard_negative_k must be positive");
  }
  if (hard_negative_weight <= 0) {
    fail(ErrorCode::Config, "aligner.hard_negative_weight must be positive");
  }
  if (surrogate_weight < 0) fail(ErrorCode::Config, "aligner.surrogate_weight must be >= 0");
  if (text_embedder != "hash" && text_embedder != "lookup") {
    fail(ErrorCode::Config,
         "aligner.text_embedder must be 'hash' or 'lookup', got '" + text_embedder + "'");
  }
}

namespace {

json config_to_json(const AlignerConfig& c) {
  json j;
  j["model"] = "aligner";
  j["text_dim"] = c.text_dim;
  j["hidden_dim"] = c.hidden_dim;
  j["shared_dim"] = c.shared_dim;
  j["feature_dim"] = c.feature_dim;
  j["vocab_buckets"] = c.vocab_buckets;
  j["init_temperature"] = c.init_temperature;
  j["learnable_temperature"] = c.learnable_temperature;
  j["temp_min"] = c.temp_min;
  j["temp_max"] = c.temp_max;
  j["symmetric"] = c.symmetric;
  j["hard_negatives"] = c.hard_negatives;
  j["hard_negative_k"] = c.hard_negative_k;
  j["hard_negative_weight"] = c.hard_negative_weight;
  j["surrogate_weight"] = c.surrogate_weight;
  j["text_embedder"] = c.text_embedder;
  j["seed"] = c.seed;
  return j;
}

AlignerConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("checkpoint config is not valid JSON: ") + e.what());
  }
  AlignerConfig c;
  c.text_dim = j.value("text_dim", c.text_dim);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.shared_dim = j.value("shared_dim", c.shared_dim);
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.vocab_buckets = j.value("vocab_buckets", c.vocab_buckets);
  c.init_temperature = j.value("init_temperature", c.init_temperature);
  c.learnable_temperature = j.value("learnable_temperature", c.learnable_temperature);
  c.temp_min = j.value("temp_min", c.temp_min);
  c.temp_max = j.value("temp_max", c.temp_max);
  c.symmetric = j.value("symmetric", c.symmetric);
  c.hard_negatives = j.value("hard_negatives", c.hard_negatives);
  c.hard_negative_k = j.value("hard_negative_k", c.hard_negative_k);
  c.hard_negative_weight = j.value("hard_negative_weight", c.hard_negative_weight);
  c.surrogate_weight = j.value("surrogate_weight", c.surrogate_weight);
  c.text_embedder = j.value("text_embedder", c.text_embedder);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::string truncate_for_message(const std::string& text) {
  if (text.size() <= 40) return text;
  return text.substr(0, 37) + "...";
}

// Log-sum-exp per row with the row max folded in as a constant shift; the
// shift cancels in the gradient, so this is exact. Returns n x 1.
NodePtr lse_rows(const NodePtr& x) {
  Eigen::VectorXd row_max = x->value.rowwise().maxCoeff();
  auto shifted =
      ad::sub(x, ad::constant(row_max * Eigen::RowVectorXd::Ones(x->value.cols())));
  return ad::add(ad::log_(ad::row_sum(ad::exp_(shifted))), ad::constant(row_max));
}

NodePtr stack_rows(const std::vector<NodePtr>& rows) {
  NodePtr out = rows.front();
  for (size_t i = 1; i < rows.size(); ++i) out = ad::concat_rows(out, rows[i]);
  return out;
}

}  // namespace

Eigen::MatrixXd similarity_matrix(const Eigen::MatrixXd& text_embs,
                                  const Eigen::MatrixXd& feat_embs) {
  if (text_embs.cols() != feat_embs.cols()) {
    fail(ErrorCode::ShapeMismatch,
         "similarity: embedding widths differ (" + std::to_string(text_embs.cols()) +
             " vs " + std::to_string(feat_embs.cols()) + ")");
  }
  return text_embs * feat_embs.transpose();
}

double contrastive_loss(const Eigen::MatrixXd& sim, double tau, bool symmetric) {
  if (sim.rows() != sim.cols() || sim.rows() < 1) {
    fail(ErrorCode::ShapeMismatch, "contrastive loss needs a square nonempty similarity matrix");
  }
  if (!(tau > 0)) fail(ErrorCode::InvalidArgument, "temperature must be positive");
  const auto anchored = [&](const Eigen::MatrixXd& s) {
    double total = 0;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const double m = s.row(i).maxCoeff();
      const double lse = m + std::log((s.row(i).array() - m).exp().sum());
      total += lse - s(i, i);
    }
    return total / static_cast<double>(s.rows());
  };
  const Eigen::MatrixXd scaled = sim / tau;
  double loss = anchored(scaled);
  if (symmetric) loss = 0.5 * (loss + anchored(scaled.transpose()));
  return loss;
}

std::vector<std::pair<int, int>> mine_hard_negatives(const Eigen::MatrixXd& sim, int k) {
  if (sim.rows() != sim.cols()) {
    fail(ErrorCode::ShapeMismatch, "hard-negative mining needs a square similarity matrix");
  }
  std::vector<std::pair<int, int>> mined;
  const int n = static_cast<int>(sim.rows());
  for (int i = 0; i < n; ++i) {
    std::vector<int> cols;
    cols.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j != i) cols.push_back(j);
    }
    std::stable_sort(cols.begin(), cols.end(),
                     [&](int a, int b) { return sim(i, a) > sim(i, b); });
    const int take = std::min<int>(k, static_cast<int>(cols.size()));
    for (int r = 0; r < take; ++r) mined.emplace_back(i, cols[r]);
  }
  return mined;
}

AlignerModel::AlignerModel(const AlignerConfig& config) : cfg_(config) {
  cfg_.validate();
  wire();
}

void AlignerModel::wire() {
  Rng rng(cfg_.seed ^ 0xa1167e37ULL);
  const int d = cfg_.text_dim;
  const int h = cfg_.hidden_dim;
  const int s = cfg_.shared_dim;
  const int k = cfg_.feature_dim;

  if (cfg_.text_embedder == "hash") {
    token_emb_ = store_.get_or_create("text.tokens", cfg_.vocab_buckets, d, [&] {
      return normal_init(cfg_.vocab_buckets, d, 0.02, rng);
    });
  }
  text_proj1_ = Linear::create(store_, "text.proj1", d, h, rng);
  text_proj2_ = Linear::create(store_, "text.proj2", h, s, rng);

  feat_lift_ = store_.get_or_create("feat.lift", k, h,
                                    [&] { return normal_init(k, h, 0.5, rng); });
  feat_pos_ = store_.get_or_create("feat.pos", k, h,
                                   [&] { return normal_init(k, h, 0.02, rng); });
  feat_block_ = TransformerBlock::create(store_, "feat.block", h, 2 * h, rng);
  feat_proj_ = Linear::create(store_, "feat.proj", h, s, rng);

  surrogate_ = Linear::create(store_, "text.surrogate", s, k, rng);

  if (cfg_.learnable_temperature) {
    log_tau_ = store_.get_or_create("temp.log_tau", 1, 1, [&] {
      return ad::Mat::Constant(1, 1, std::log(cfg_.init_temperature));
    });
  }
}

AlignerModel AlignerModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "aligner") {
    fail(ErrorCode::Config, "checkpoint holds a '" + ckpt.kind + "' model, expected 'aligner'");
  }
  AlignerModel model(config_from_json(ckpt.config_json));
  model.store_.load_values(ckpt.arrays);
  return model;
}

Checkpoint AlignerModel::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "aligner";
  ckpt.config_json = config_to_json(cfg_).dump();
  ckpt.arrays = store_.values();
  return ckpt;
}

NodePtr AlignerModel::text_vector_graph(const std::string& text) const {
  if (text.empty()) fail(ErrorCode::InvalidArgument, "cannot embed an empty text");
  if (cfg_.text_embedder == "hash") {
    const auto tokens = tokenize(text);
    if (tokens.empty()) {
      fail(ErrorCode::InvalidArgument, "text '" + truncate_for_message(text) +
                                           "' contains no alphanumeric tokens");
    }
    std::vector<int> indices;
    indices.reserve(tokens.size());
    for (const auto& tok : tokens) {
      indices.push_back(
          static_cast<int>(fnv1a64(tok) % static_cast<uint64_t>(cfg_.vocab_buckets)));
    }
    auto gathered = ad::gather_rows(token_emb_, indices);
    return ad::scale(ad::col_sum(gathered), 1.0 / static_cast<double>(tokens.size()));
  }
  if (text_vectors_.empty()) {
    fail(ErrorCode::Config,
         "lookup text embedder has no vector table; load the precomputed-embedding file first");
  }
  const std::string key = sha256_hex(text);
  const auto it = text_vectors_.find(key);
  if (it == text_vectors_.end()) {
    fail(ErrorCode::InvalidArgument, "no precomputed vector for text '" +
                                         truncate_for_message(text) + "' (digest " + key + ")");
  }
  return ad::constant(it->second.transpose());
}

NodePtr AlignerModel::embed_text_graph(const std::string& text) const {
  auto v = text_vector_graph(text);  // 1 x text_dim
  auto hidden = ad::gelu(text_proj1_(v));
  return l2_normalize_rows(text_proj2_(hidden));
}

NodePtr AlignerModel::embed_features_graph(const Eigen::VectorXd& features) const {
  if (features.size() != cfg_.feature_dim) {
    fail(ErrorCode::ShapeMismatch,
         "feature vector has dimension " + std::to_string(features.size()) +
             ", aligner expects " + std::to_string(cfg_.feature_dim));
  }
  // One token per property: its value scales a learned direction, plus a
  // positional term so the encoder stays sensitive to which property it is.
  auto tokens = ad::add(ad::mul_colvec(feat_lift_, ad::constant(features)), feat_pos_);
  auto mixed = feat_block_(tokens);  // k x h
  auto pooled = ad::scale(ad::col_sum(mixed), 1.0 / static_cast<double>(cfg_.feature_dim));
  return l2_normalize_rows(feat_proj_(pooled));
}

NodePtr AlignerModel::surrogate_graph(const NodePtr& text_emb) const {
  return surrogate_(text_emb);
}

NodePtr AlignerModel::temperature_graph() const {
  if (cfg_.learnable_temperature) {
    return ad::clamp(ad::exp_(log_tau_), cfg_.temp_min, cfg_.temp_max);
  }
  return ad::constant_scalar(cfg_.init_temperature);
}

AlignedCondition AlignerModel::embed_text(const std::string& text) const {
  AlignedCondition c;
  c.v = embed_text_graph(text)->value.row(0).transpose();
  c.provenance = "text";
  return c;
}

AlignedCondition AlignerModel::embed_features(const Eigen::VectorXd& features) const {
  AlignedCondition c;
  c.v = embed_features_graph(features)->value.row(0).transpose();
  c.provenance = "features";
  return c;
}

Eigen::VectorXd AlignerModel::surrogate_features(const std::string& text) const {
  return surrogate_graph(embed_text_graph(text))->value.row(0).transpose();
}

double AlignerModel::temperature() const { return temperature_graph()->value(0, 0); }

void AlignerModel::set_text_vectors(std::map<std::string, Eigen::VectorXd> table) {
  for (const auto& [key, vec] : table) {
    if (vec.size() != cfg_.text_dim) {
      fail(ErrorCode::ShapeMismatch, "text vector for digest " + key + " has dimension " +
                                         std::to_string(vec.size()) + ", expected " +
                                         std::to_string(cfg_.text_dim));
    }
  }
  text_vectors_ = std::move(table);
}

void AlignerModel::load_text_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open text-vector file: " + path);
  std::map<std::string, Eigen::VectorXd> table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string digest;
    fields >> digest;
    if (digest.size() != 64) {
      fail(ErrorCode::Parse, path + ":" + std::to_string(line_no) +
                                 ": expected a 64-hex-char digest, got '" + digest + "'");
    }
    Eigen::VectorXd vec(cfg_.text_dim);
    for (int i = 0; i < cfg_.text_dim; ++i) {
      if (!(fields >> vec(i))) {
        fail(ErrorCode::Parse, path + ":" + std::to_string(line_no) + ": expected " +
                                   std::to_string(cfg_.text_dim) + " floats after the digest");
      }
    }
    double extra;
    if (fields >> extra) {
      fail(ErrorCode::Parse, path + ":" + std::to_string(line_no) + ": more than " +
                                 std::to_string(cfg_.text_dim) + " floats on the line");
    }
    table[digest] = std::move(vec);
  }
  if (table.empty()) fail(ErrorCode::Parse, path + ": no text vectors found");
  text_vectors_ = std::move(table);
}

double retrieval_top1(const AlignerModel& model, const std::vector<AlignerPair>& pairs) {
  if (pairs.empty()) fail(ErrorCode::InvalidArgument, "retrieval needs at least one pair");
  const int n = static_cast<int>(pairs.size());
  Eigen::MatrixXd texts(n, model.config().shared_dim);
  Eigen::MatrixXd feats(n, model.config().shared_dim);
  for (int i = 0; i < n; ++i) {
    texts.row(i) = model.embed_text(pairs[i].text).v.transpose();
    feats.row(i) = model.embed_features(pairs[i].features).v.transpose();
  }
  const Eigen::MatrixXd sim = similarity_matrix(texts, feats);
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    Eigen::Index best;
    sim.row(i).maxCoeff(&best);
    hits += (best == i);
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

std::vector<AlignerEpochStats> train_aligner(AlignerModel& model,
                                             const std::vector<AlignerPair>& pairs,
                                             const TrainOptions& opts, uint64_t seed,
                                             const std::string& save_path) {
  if (pairs.size() < 2) {
    fail(ErrorCode::InvalidArgument, "contrastive training needs at least 2 text-feature pairs");
  }
  const AlignerConfig& cfg = model.config();
  Adam adam(model.params(), AdamConfig{opts.lr, 0.9, 0.999, 1e-8});
  Rng order_rng(seed ^ 0xa116f017ULL);
  std::vector<size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), size_t{0});

  std::vector<AlignerEpochStats> history;
  history.reserve(opts.epochs);
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    adam.set_lr(scheduled_lr(opts, epoch));
    order_rng.shuffle(order);
    double epoch_contrast = 0, epoch_surr = 0;
    size_t batches = 0;

    for (size_t start = 0; start < order.size(); start += opts.batch_size) {
      const size_t count = std::min<size_t>(opts.batch_size, order.size() - start);
      std::vector<NodePtr> text_rows, feat_rows;
      text_rows.reserve(count);
      feat_rows.reserve(count);
      NodePtr surr_sum;
      for (size_t b = 0; b < count; ++b) {
        const AlignerPair& pair = pairs[order[start + b]];
        auto t = model.embed_text_graph(pair.text);
        text_rows.push_back(t);
        feat_rows.push_back(model.embed_features_graph(pair.features));
        auto diff =
            ad::sub(model.surrogate_graph(t), ad::constant(pair.features.transpose()));
        auto item_mse = ad::mean_all(ad::mul(diff, diff));
        surr_sum = surr_sum ? ad::add(surr_sum, item_mse) : item_mse;
      }
      auto texts = stack_rows(text_rows);
      auto feats = stack_rows(feat_rows);
      auto sim = ad::matmul(texts, ad::transpose(feats));
      auto inv_tau = ad::cdiv(ad::constant_scalar(1.0), model.temperature_graph());
      auto scores = ad::mul_scalarvar(sim, inv_tau);

      NodePtr row_scores = scores;
      NodePtr col_scores = ad::transpose(scores);
      if (cfg.hard_negatives) {
        const double log_w = std::log(cfg.hard_negative_weight);
        ad::Mat weights = ad::Mat::Zero(count, count);
        for (const auto& [i, j] : mine_hard_negatives(sim->value, cfg.hard_negative_k)) {
          weights(i, j) = log_w;
        }
        row_scores = ad::add(scores, ad::constant(weights));
        ad::Mat weights_t = ad::Mat::Zero(count, count);
        for (const auto& [i, j] :
             mine_hard_negatives(sim->value.transpose(), cfg.hard_negative_k)) {
          weights_t(i, j) = log_w;
        }
        col_scores = ad::add(ad::transpose(scores), ad::constant(weights_t));
      }

      auto diag = ad::take_diag(scores);  // matched-pair logits, kept unweighted
      auto contrast = ad::mean_all(ad::sub(lse_rows(row_scores), diag));
      if (cfg.symmetric) {
        auto col_loss = ad::mean_all(ad::sub(lse_rows(col_scores), diag));
        contrast = ad::scale(ad::add(contrast, col_loss), 0.5);
      }
      auto surr_mean = ad::scale(surr_sum, 1.0 / static_cast<double>(count));
      auto total = ad::add(contrast, ad::scale(surr_mean, cfg.surrogate_weight));

      if (!std::isfinite(total->value(0, 0))) {
        fail(ErrorCode::Numeric, "aligner loss diverged at epoch " + std::to_string(epoch));
      }
      ad::backward(total);
      adam.step();
      epoch_contrast += contrast->value(0, 0);
      epoch_surr += surr_mean->value(0, 0);
      ++batches;
    }

    AlignerEpochStats stats;
    stats.epoch = epoch;
    stats.loss = epoch_contrast / static_cast<double>(batches);
    stats.surrogate_loss = epoch_surr / static_cast<double>(batches);
    stats.retrieval_top1 = retrieval_top1(model, pairs);
    stats.tau = model.temperature();
    history.push_back(stats);
    if (opts.verbose) {
      std::cerr << "[aligner] epoch " << epoch << "/" << opts.epochs << " loss " << stats.loss
                << " surrogate " << stats.surrogate_loss << " retrieval "
                << stats.retrieval_top1 << " tau " << stats.tau << "\n";
    }
    if (!save_path.empty() && opts.save_interval > 0 &&
        (epoch % opts.save_interval == 0 || epoch == opts.epochs)) {
      save_checkpoint(model.to_checkpoint(), save_path);
    }
  }
  return history;
}

}  // namespace cmadiff
