// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "cmadiff/cmadiff.h"

#include <cstring>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "aa/property_table.hpp"
#include "align/aligner.hpp"
#include "cli/run.hpp"
#include "core/error.hpp"
#include "core/version.hpp"
#include "cvae/cvae.hpp"
#include "diffusion/diffusion.hpp"
#include "evalkit/metrics.hpp"
#include "nn/checkpoint.hpp"
#include "pipeline/generation.hpp"

struct cmadiff_table {
  cmadiff::AminoAcidPropertyTable table;
};

struct cmadiff_pipeline {
  cmadiff::CvaeModel cvae;
  cmadiff::AlignerModel aligner;
  cmadiff::DiffusionModel diffusion;
  cmadiff::AminoAcidPropertyTable table;
};

struct cmadiff_sequences {
  std::vector<std::string> sequences;
};

namespace {

thread_local std::string g_last_error;

cmadiff_status status_of(cmadiff::ErrorCode code) {
  switch (code) {
    case cmadiff::ErrorCode::InvalidArgument: return CMADIFF_ERR_INVALID_ARGUMENT;
    case cmadiff::ErrorCode::Io: return CMADIFF_ERR_IO;
    case cmadiff::ErrorCode::Parse: return CMADIFF_ERR_PARSE;
    case cmadiff::ErrorCode::Config: return CMADIFF_ERR_CONFIG;
    case cmadiff::ErrorCode::ShapeMismatch: return CMADIFF_ERR_SHAPE_MISMATCH;
    case cmadiff::ErrorCode::Numeric: return CMADIFF_ERR_NUMERIC;
    case cmadiff::ErrorCode::Internal: return CMADIFF_ERR_INTERNAL;
  }
  return CMADIFF_ERR_INTERNAL;
}

// Runs `body`, routing failures into the thread-local error message.
template <typename Fn>
cmadiff_status guarded(Fn&& body) {
  try {
    body();
    g_last_error.clear();
    return CMADIFF_OK;
  } catch (const cmadiff::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CMADIFF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return CMADIFF_ERR_INTERNAL;
  }
}

cmadiff_status require(bool ok, const char* message) {
  if (ok) return CMADIFF_OK;
  g_last_error = message;
  return CMADIFF_ERR_INVALID_ARGUMENT;
}

cmadiff_status run_generation(cmadiff_pipeline* pipeline, cmadiff::GenerationRequest request,
                              cmadiff_sequences** out) {
  return guarded([&] {
    const auto generated =
        cmadiff::generate(request, pipeline->cvae, pipeline->aligner, pipeline->diffusion,
                          pipeline->table);
    auto handle = std::make_unique<cmadiff_sequences>();
    handle->sequences.reserve(generated.size());
    for (const auto& g : generated) handle->sequences.push_back(g.sequence);
    *out = handle.release();
  });
}

}  // namespace

extern "C" {

const char* cmadiff_version(void) { return cmadiff::kVersion; }

const char* cmadiff_status_string(cmadiff_status status) {
  switch (status) {
    case CMADIFF_OK: return "ok";
    case CMADIFF_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case CMADIFF_ERR_IO: return "io";
    case CMADIFF_ERR_PARSE: return "parse";
    case CMADIFF_ERR_CONFIG: return "config";
    case CMADIFF_ERR_SHAPE_MISMATCH: return "shape-mismatch";
    case CMADIFF_ERR_NUMERIC: return "numeric";
    case CMADIFF_ERR_INTERNAL: return "internal";
  }
  return "internal";
}

const char* cmadiff_last_error(void) { return g_last_error.c_str(); }

int cmadiff_main(int argc, const char* const* argv) { return cmadiff::run_cli(argc, argv); }

cmadiff_status cmadiff_table_open(const char* csv_path, cmadiff_table** out) {
  if (auto s = require(out != nullptr, "out must not be NULL")) return s;
  return guarded([&] {
    auto handle = std::make_unique<cmadiff_table>();
    handle->table = csv_path != nullptr ? cmadiff::load_property_table_csv(csv_path)
                                        : cmadiff::load_property_table();
    *out = handle.release();
  });
}

void cmadiff_table_free(cmadiff_table* table) { delete table; }

cmadiff_status cmadiff_pipeline_open(const char* cvae_ckpt, const char* aligner_ckpt,
                                     const char* diffusion_ckpt, const char* table_csv,
                                     cmadiff_pipeline** out) {
  if (auto s = require(out != nullptr, "out must not be NULL")) return s;
  if (auto s = require(cvae_ckpt && aligner_ckpt && diffusion_ckpt,
                       "checkpoint paths must not be NULL")) {
    return s;
  }
  return guarded([&] {
    auto cvae = cmadiff::CvaeModel::from_checkpoint(cmadiff::load_checkpoint(cvae_ckpt, "cvae"));
    auto aligner =
        cmadiff::AlignerModel::from_checkpoint(cmadiff::load_checkpoint(aligner_ckpt, "aligner"));
    auto diffusion = cmadiff::DiffusionModel::from_checkpoint(
        cmadiff::load_checkpoint(diffusion_ckpt, "diffusion"));
    auto table = table_csv != nullptr ? cmadiff::load_property_table_csv(table_csv)
                                      : cmadiff::load_property_table();
    *out = new cmadiff_pipeline{std::move(cvae), std::move(aligner), std::move(diffusion),
                                std::move(table)};
  });
}

void cmadiff_pipeline_free(cmadiff_pipeline* pipeline) { delete pipeline; }

cmadiff_status cmadiff_generate_random(cmadiff_pipeline* pipeline, uint64_t seed, int count,
                                       int min_len, int max_len, cmadiff_sequences** out) {
  if (auto s = require(pipeline != nullptr, "pipeline must not be NULL")) return s;
  if (auto s = require(out != nullptr, "out must not be NULL")) return s;
  cmadiff::GenerationRequest request;
  request.mode = cmadiff::ConditionMode::RandomFeature;
  request.seed = seed;
  request.count = count;
  request.min_length = min_len;
  request.max_length = max_len;
  return run_generation(pipeline, std::move(request), out);
}

cmadiff_status cmadiff_generate_text(cmadiff_pipeline* pipeline, const char* text, uint64_t seed,
                                     int count, int min_len, int max_len,
                                     cmadiff_sequences** out) {
  if (auto s = require(pipeline != nullptr, "pipeline must not be NULL")) return s;
  if (auto s = require(text != nullptr, "text must not be NULL")) return s;
  if (auto s = require(out != nullptr, "out must not be NULL")) return s;
  cmadiff::GenerationRequest request;
  request.mode = cmadiff::ConditionMode::Text;
  request.text = text;
  request.seed = seed;
  request.count = count;
  request.min_length = min_len;
  request.max_length = max_len;
  return run_generation(pipeline, std::move(request), out);
}

cmadiff_status cmadiff_generate_features(cmadiff_pipeline* pipeline, const double* features,
                                         size_t feature_count, uint64_t seed, int count,
                                         int min_len, int max_len, cmadiff_sequences** out) {
  if (auto s = require(pipeline != nullptr, "pipeline must not be NULL")) return s;
  if (auto s = require(features != nullptr || feature_count == 0,
                       "features must not be NULL")) {
    return s;
  }
  if (auto s = require(out != nullptr, "out must not be NULL")) return s;
  cmadiff::GenerationRequest request;
  request.mode = cmadiff::ConditionMode::RawFeature;
  request.target_features =
      Eigen::Map<const Eigen::VectorXd>(features, static_cast<Eigen::Index>(feature_count));
  request.seed = seed;
  request.count = count;
  request.min_length = min_len;
  request.max_length = max_len;
  return run_generation(pipeline, std::move(request), out);
}

size_t cmadiff_sequences_count(const cmadiff_sequences* sequences) {
  return sequences != nullptr ? sequences->sequences.size() : 0;
}

const char* cmadiff_sequences_get(const cmadiff_sequences* sequences, size_t index) {
  if (sequences == nullptr || index >= sequences->sequences.size()) {
    g_last_error = "sequence index out of range";
    return nullptr;
  }
  return sequences->sequences[index].c_str();
}

void cmadiff_sequences_free(cmadiff_sequences* sequences) { delete sequences; }

cmadiff_status cmadiff_avg_hydrophobicity(const cmadiff_table* table, const char* sequence,
                                          double* out) {
  if (auto s = require(table && sequence && out, "table, sequence, out must not be NULL")) {
    return s;
  }
  return guarded([&] { *out = cmadiff::avg_hydrophobicity(sequence, table->table); });
}

cmadiff_status cmadiff_net_charge(const char* sequence, double ph, double* out) {
  if (auto s = require(sequence && out, "sequence and out must not be NULL")) return s;
  return guarded([&] { *out = cmadiff::net_charge(sequence, ph); });
}

cmadiff_status cmadiff_isoelectric_point(const char* sequence, double* out) {
  if (auto s = require(sequence && out, "sequence and out must not be NULL")) return s;
  return guarded([&] { *out = cmadiff::isoelectric_point(sequence); });
}

cmadiff_status cmadiff_shannon_entropy(const char* const* sequences, size_t count, double* out) {
  if (auto s = require(out != nullptr, "out must not be NULL")) return s;
  if (auto s = require(sequences != nullptr || count == 0, "sequences must not be NULL")) {
    return s;
  }
  return guarded([&] {
    std::vector<std::string> pool;
    pool.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      if (sequences[i] == nullptr) {
        cmadiff::fail(cmadiff::ErrorCode::InvalidArgument, "sequence entries must not be NULL");
      }
      pool.emplace_back(sequences[i]);
    }
    *out = cmadiff::shannon_entropy(pool);
  });
}

cmadiff_status cmadiff_sequence_identity(const char* a, const char* b, double* out) {
  if (auto s = require(a && b && out, "a, b, out must not be NULL")) return s;
  return guarded([&] { *out = cmadiff::sequence_identity(a, b); });
}

}  // extern "C"
