// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "config/run_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"
#include "pipeline/generation.hpp"

namespace cmadiff {

using nlohmann::json;

namespace {

[[noreturn]] void bad_type(const std::string& path, const char* expected) {
  fail(ErrorCode::Config, "config key '" + path + "' must be " + expected);
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad_type(path, "an integer");
  return v.get<int>();
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) bad_type(path, "a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) bad_type(path, "a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad_type(path, "a string");
  return v.get<std::string>();
}

uint64_t as_u64(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !v.is_number_integer()) bad_type(path, "an integer");
  if (v.is_number_integer() && v.get<int64_t>() < 0) bad_type(path, "a non-negative integer");
  return v.get<uint64_t>();
}

std::vector<double> as_double_list(const json& v, const std::string& path) {
  if (!v.is_array()) bad_type(path, "an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& item : v) {
    if (!item.is_number()) bad_type(path, "an array of numbers");
    out.push_back(item.get<double>());
  }
  return out;
}

[[noreturn]] void unknown_key(const std::string& path) {
  fail(ErrorCode::Config, "unknown config key '" + path + "'");
}

void require_object(const json& v, const std::string& path) {
  if (!v.is_object()) bad_type(path, "an object");
}

void apply_train(TrainOptions& t, const json& section, const std::string& prefix) {
  require_object(section, prefix);
  for (const auto& [key, value] : section.items()) {
    const std::string path = prefix + "." + key;
    if (key == "epochs") {
      t.epochs = as_int(value, path);
    } else if (key == "batch_size") {
      t.batch_size = as_int(value, path);
    } else if (key == "lr") {
      t.lr = as_double(value, path);
    } else if (key == "lr_step_epochs") {
      t.lr_step_epochs = as_int(value, path);
    } else if (key == "lr_decay") {
      t.lr_decay = as_double(value, path);
    } else if (key == "save_interval") {
      t.save_interval = as_int(value, path);
    } else {
      unknown_key(path);
    }
  }
}

void apply_featurizer(RunConfig::Featurizer& f, const json& section, const std::string& prefix) {
  require_object(section, prefix);
  for (const auto& [key, value] : section.items()) {
    const std::string path = prefix + "." + key;
    if (key == "l_max") {
      f.l_max = as_int(value, path);
    } else if (key == "table_csv") {
      f.table_csv = as_string(value, path);
    } else {
      unknown_key(path);
    }
  }
}

void apply_ingest(RunConfig::Ingest& g, const json& section, const std::string& prefix) {
  require_object(section, prefix);
  for (const auto& [key, value] : section.items()) {
    const std::string path = prefix + "." + key;
    if (key == "min_length") {
      g.min_length = as_int(value, path);
    } else if (key == "max_length") {
      g.max_length = as_int(value, path);
    } else {
      unknown_key(path);
    }
  }
}

void apply_cvae(RunConfig::CvaeSection& c, const json& section, const std::string& prefix) {
  require_object(section, prefix);
  for (const auto& [key, value] : section.items()) {
    const std::string path = prefix + "." + key;
    if (key == "latent_dim") {
      c.model.latent_dim = as_int(value, path);
    } else if (key == "hidden_dim") {
      c.model.hidden_dim = as_int(value, path);
    } else if (key == "l_max") {
      c.model.l_max = as_int(value, path);
    } else if (key == "encoder_depth") {
      c.model.encoder_depth = as_int(value, path);
    } else if (key == "decoder_depth") {
      c.model.decoder_depth = as_int(value, path);
    } else if (key == "kl_weight") {
      c.model.kl_weight = as_double(value, path);
    } else if (key == "cross_entropy_recon") {
      c.model.cross_entropy_recon = as_bool(value, path);
    } else if (key == "train") {
      apply_train(c.train, value, path);
    } else {
      unknown_key(path);
    }
  }
}

void apply_aligner(RunConfig::AlignerSection& a, const json& section, const std::string& prefix) {
  require_object(section, prefix);
  for (const auto& [key, value] : section.items()) {
    const std::string path = prefix + "." + key;
    if (key == "text_dim") {
      a.model.text_dim = as_int(value, path);
    } else if (key == "hidden_dim") {
      a.model.hidden_dim = as_int(value, path);
    } else if (key == "shared_dim") {
      a.model.shared_dim = as_int(value, path);
    } else if (key == "vocab_buckets") {
      a.model.vocab_buckets = as_int(value, path);
    } else if (key == "init_temperature") {
      a.model.init_temperature = as_double(value, path);
    } else if (key == "learnable_temperature") {
      a.model.learnable_temperature = as_bool(value, path);
    } else if (key == "temp_min") {
      a.model.temp_min = as_double(value, path);
    } else if (key == "temp_max") {
      a.model.temp_max = as_double(value, path);
    } else if (key == "symmetric") {
      a.model.symmetric = as_bool(value, path);
    } else if (key == "hard_negatives") {
      a.model.hard_negatives = as_bool(value, path);
    } else if (key == "hard_negative_k") {
      a.model.hard_negative_k = as_int(value, path);
    } else if (key == "hard_negative_weight") {
      a.model.hard_negative_weight = as_double(value, path);
    } else if (key == "surrogate_weight") {
      a.model.surrogate_weight = as_double(value, path);
    } else if (key == "text_embedder") {
      a.model.text_embedder = as_string(value, path);
    } else if (key == "text_vectors") {
      a.text_vectors = as_string(value, path);
    } else if (key == "holdout") {
      a.holdout = as_double(value, path);
    } else if (key == "train") {
      apply_train(a.train, value, path);
    } else {
      unknown_key(path);
    }
  }
}

void apply_diffusion(RunConfig::DiffusionSection& d, const json& section,
                     const std::string& prefix) {
  require_object(section, prefix);
  for (const auto& [key, value] : section.items()) {
    const std::string path = prefix + "." + key;
    if (key == "latent_dim") {
      d.model.latent_dim = as_int(value, path);
    } else if (key == "cond_dim") {
      d.model.cond_dim = as_int(value, path);
    } else if (key == "channels") {
      d.model.channels = as_int(value, path);
    } else if (key == "levels") {
      d.model.levels = as_int(value, path);
    } else if (key == "time_dim") {
      d.model.time_dim = as_int(value, path);
    } else if (key == "T") {
      d.model.T = as_int(value, path);
    } else if (key == "beta_start") {
      d.model.beta_start = as_double(value, path);
    } else if (key == "beta_end") {
      d.model.beta_end = as_double(value, path);
    } else if (key == "schedule_kind") {
      d.model.schedule_kind = as_string(value, path);
    } else if (key == "use_sampled_z") {
      d.use_sampled_z = as_bool(value, path);
    } else if (key == "cond_dropout") {
      d.cond_dropout = as_double(value, path);
    } else if (key == "train") {
      apply_train(d.train, value, path);
    } else {
      unknown_key(path);
    }
  }
}

void apply_generation(RunConfig::Generation& g, const json& section, const std::string& prefix) {
  require_object(section, prefix);
  for (const auto& [key, value] : section.items()) {
    const std::string path = prefix + "." + key;
    if (key == "mode") {
      g.mode = as_string(value, path);
    } else if (key == "text") {
      g.text = as_string(value, path);
    } else if (key == "features") {
      g.features = as_double_list(value, path);
    } else if (key == "count") {
      g.count = as_int(value, path);
    } else if (key == "min_length") {
      g.min_length = as_int(value, path);
    } else if (key == "max_length") {
      g.max_length = as_int(value, path);
    } else {
      unknown_key(path);
    }
  }
}

void apply_evaluation(RunConfig::Evaluation& e, const json& section, const std::string& prefix) {
  require_object(section, prefix);
  for (const auto& [key, value] : section.items()) {
    const std::string path = prefix + "." + key;
    if (key == "novelty_threshold") {
      e.novelty_threshold = as_double(value, path);
    } else if (key == "min_score") {
      e.min_score = as_double(value, path);
    } else {
      unknown_key(path);
    }
  }
}

void apply_json_tree(RunConfig& config, const json& root) {
  if (!root.is_object()) fail(ErrorCode::Config, "config root must be a JSON object");
  for (const auto& [key, value] : root.items()) {
    if (key == "seed") {
      config.seed = as_u64(value, key);
    } else if (key == "out_dir") {
      config.out_dir = as_string(value, key);
    } else if (key == "log_level") {
      config.log_level = as_string(value, key);
    } else if (key == "featurizer") {
      apply_featurizer(config.featurizer, value, key);
    } else if (key == "ingest") {
      apply_ingest(config.ingest, value, key);
    } else if (key == "cvae") {
      apply_cvae(config.cvae, value, key);
    } else if (key == "aligner") {
      apply_aligner(config.aligner, value, key);
    } else if (key == "diffusion") {
      apply_diffusion(config.diffusion, value, key);
    } else if (key == "generation") {
      apply_generation(config.generation, value, key);
    } else if (key == "evaluation") {
      apply_evaluation(config.evaluation, value, key);
    } else {
      unknown_key(key);
    }
  }
}

json train_to_json(const TrainOptions& t) {
  return {{"epochs", t.epochs},         {"batch_size", t.batch_size},
          {"lr", t.lr},                 {"lr_step_epochs", t.lr_step_epochs},
          {"lr_decay", t.lr_decay},     {"save_interval", t.save_interval}};
}

}  // namespace

void RunConfig::validate() const {
  if (log_level != "quiet" && log_level != "info" && log_level != "debug") {
    fail(ErrorCode::Config, "config key 'log_level' must be quiet, info, or debug");
  }
  if (out_dir.empty()) fail(ErrorCode::Config, "config key 'out_dir' must be non-empty");
  if (featurizer.l_max < 1) fail(ErrorCode::Config, "config key 'featurizer.l_max' must be positive");
  if (ingest.min_length < 1 || ingest.min_length > ingest.max_length) {
    fail(ErrorCode::Config, "config keys 'ingest.min_length'/'ingest.max_length' must satisfy 1 <= min <= max");
  }
  cvae.model.validate();
  aligner.model.validate();
  diffusion.model.validate();
  if (aligner.holdout < 0 || aligner.holdout >= 1) {
    fail(ErrorCode::Config, "config key 'aligner.holdout' must lie in [0, 1)");
  }
  condition_mode_from_string(generation.mode);
  if (generation.count < 0) fail(ErrorCode::Config, "config key 'generation.count' must be >= 0");
  if (generation.min_length < 1 || generation.min_length > generation.max_length) {
    fail(ErrorCode::Config,
         "config keys 'generation.min_length'/'generation.max_length' must satisfy 1 <= min <= max");
  }
  if (evaluation.novelty_threshold < 0 || evaluation.novelty_threshold > 1) {
    fail(ErrorCode::Config, "config key 'evaluation.novelty_threshold' must lie in [0, 1]");
  }
  if (diffusion.cond_dropout < 0 || diffusion.cond_dropout > 1) {
    fail(ErrorCode::Config, "config key 'diffusion.cond_dropout' must lie in [0, 1]");
  }
  for (const auto& [name, t] :
       {std::pair<const char*, const TrainOptions*>{"cvae.train", &cvae.train},
        {"aligner.train", &aligner.train},
        {"diffusion.train", &diffusion.train}}) {
    if (t->epochs < 1) fail(ErrorCode::Config, std::string("config key '") + name + ".epochs' must be positive");
    if (t->batch_size < 1) fail(ErrorCode::Config, std::string("config key '") + name + ".batch_size' must be positive");
    if (!(t->lr > 0)) fail(ErrorCode::Config, std::string("config key '") + name + ".lr' must be positive");
    if (t->lr_decay <= 0 || t->lr_decay > 1) {
      fail(ErrorCode::Config, std::string("config key '") + name + ".lr_decay' must lie in (0, 1]");
    }
    if (t->lr_step_epochs < 0) {
      fail(ErrorCode::Config, std::string("config key '") + name + ".lr_step_epochs' must be >= 0");
    }
    if (t->save_interval < 0) {
      fail(ErrorCode::Config, std::string("config key '") + name + ".save_interval' must be >= 0");
    }
  }
}

std::string RunConfig::to_json_text() const {
  json j;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["log_level"] = log_level;
  j["featurizer"] = {{"l_max", featurizer.l_max}, {"table_csv", featurizer.table_csv}};
  j["ingest"] = {{"min_length", ingest.min_length}, {"max_length", ingest.max_length}};
  j["cvae"] = {{"latent_dim", cvae.model.latent_dim},
               {"hidden_dim", cvae.model.hidden_dim},
               {"l_max", cvae.model.l_max},
               {"encoder_depth", cvae.model.encoder_depth},
               {"decoder_depth", cvae.model.decoder_depth},
               {"kl_weight", cvae.model.kl_weight},
               {"cross_entropy_recon", cvae.model.cross_entropy_recon},
               {"train", train_to_json(cvae.train)}};
  j["aligner"] = {{"text_dim", aligner.model.text_dim},
                  {"hidden_dim", aligner.model.hidden_dim},
                  {"shared_dim", aligner.model.shared_dim},
                  {"vocab_buckets", aligner.model.vocab_buckets},
                  {"init_temperature", aligner.model.init_temperature},
                  {"learnable_temperature", aligner.model.learnable_temperature},
                  {"temp_min", aligner.model.temp_min},
                  {"temp_max", aligner.model.temp_max},
                  {"symmetric", aligner.model.symmetric},
                  {"hard_negatives", aligner.model.hard_negatives},
                  {"hard_negative_k", aligner.model.hard_negative_k},
                  {"hard_negative_weight", aligner.model.hard_negative_weight},
                  {"surrogate_weight", aligner.model.surrogate_weight},
                  {"text_embedder", aligner.model.text_embedder},
                  {"text_vectors", aligner.text_vectors},
                  {"holdout", aligner.holdout},
                  {"train", train_to_json(aligner.train)}};
  j["diffusion"] = {{"latent_dim", diffusion.model.latent_dim},
                    {"cond_dim", diffusion.model.cond_dim},
                    {"channels", diffusion.model.channels},
                    {"levels", diffusion.model.levels},
                    {"time_dim", diffusion.model.time_dim},
                    {"T", diffusion.model.T},
                    {"beta_start", diffusion.model.beta_start},
                    {"beta_end", diffusion.model.beta_end},
                    {"schedule_kind", diffusion.model.schedule_kind},
                    {"use_sampled_z", diffusion.use_sampled_z},
                    {"cond_dropout", diffusion.cond_dropout},
                    {"train", train_to_json(diffusion.train)}};
  j["generation"] = {{"mode", generation.mode},
                     {"text", generation.text},
                     {"features", generation.features},
                     {"count", generation.count},
                     {"min_length", generation.min_length},
                     {"max_length", generation.max_length}};
  j["evaluation"] = {{"novelty_threshold", evaluation.novelty_threshold},
                     {"min_score", evaluation.min_score}};
  return j.dump(2);
}

void apply_config_json(RunConfig& config, const std::string& json_text,
                       const std::string& source_name) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, source_name + ": invalid JSON: " + e.what());
  }
  apply_json_tree(config, root);
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig config;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (!text.empty()) apply_config_json(config, text, path);
  }
  for (const auto& override_str : overrides) {
    const auto eq = override_str.find('=');
    if (eq == std::string::npos || eq == 0) {
      fail(ErrorCode::InvalidArgument,
           "override '" + override_str + "' must look like section.key=value");
    }
    const std::string dotted = override_str.substr(0, eq);
    const std::string value_text = override_str.substr(eq + 1);
    json value;
    try {
      value = json::parse(value_text);
    } catch (const json::exception&) {
      value = value_text;  // unquoted strings are taken literally
    }
    // Build a one-leaf tree for the dotted path and apply it like a file.
    json tree = value;
    size_t end = dotted.size();
    while (true) {
      const auto dot = dotted.rfind('.', end - 1);
      const std::string key =
          dot == std::string::npos ? dotted.substr(0, end) : dotted.substr(dot + 1, end - dot - 1);
      if (key.empty()) {
        fail(ErrorCode::InvalidArgument, "override '" + override_str + "' has an empty key segment");
      }
      tree = json{{key, std::move(tree)}};
      if (dot == std::string::npos) break;
      end = dot;
    }
    apply_json_tree(config, tree);
  }
  config.validate();
  return config;
}

}  // namespace cmadiff
