// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/param_store.hpp"

#include "core/error.hpp"

namespace cmadiff {

ad::NodePtr ParamStore::get_or_create(const std::string& name, Eigen::Index rows,
                                      Eigen::Index cols,
                                      const std::function<ad::Mat()>& init) {
  auto it = params_.find(name);
  if (it != params_.end()) {
    const auto& v = it->second->value;
    if (v.rows() != rows || v.cols() != cols) {
      fail(ErrorCode::ShapeMismatch,
           "parameter '" + name + "' has shape " + std::to_string(v.rows()) + "x" +
               std::to_string(v.cols()) + ", expected " + std::to_string(rows) + "x" +
               std::to_string(cols));
    }
    return it->second;
  }
  ad::Mat value = init();
  if (value.rows() != rows || value.cols() != cols) {
    fail(ErrorCode::Internal, "initializer for '" + name + "' produced the wrong shape");
  }
  auto node = ad::param(std::move(value));
  params_.emplace(name, node);
  return node;
}

ad::NodePtr ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) {
    fail(ErrorCode::InvalidArgument, "unknown parameter '" + name + "'");
  }
  return it->second;
}

size_t ParamStore::scalar_count() const {
  size_t n = 0;
  for (const auto& [name, node] : params_) n += static_cast<size_t>(node->value.size());
  return n;
}

std::map<std::string, ad::Mat> ParamStore::values() const {
  std::map<std::string, ad::Mat> out;
  for (const auto& [name, node] : params_) out.emplace(name, node->value);
  return out;
}

void ParamStore::load_values(const std::map<std::string, ad::Mat>& values) {
  for (const auto& [name, value] : values) {
    auto it = params_.find(name);
    if (it == params_.end()) {
      fail(ErrorCode::Config, "checkpoint has unknown parameter '" + name + "'");
    }
    const auto& cur = it->second->value;
    if (cur.rows() != value.rows() || cur.cols() != value.cols()) {
      fail(ErrorCode::Config, "checkpoint parameter '" + name + "' has shape " +
                                  std::to_string(value.rows()) + "x" +
                                  std::to_string(value.cols()) + ", model expects " +
                                  std::to_string(cur.rows()) + "x" +
                                  std::to_string(cur.cols()));
    }
    it->second->value = value;
  }
  for (const auto& [name, node] : params_) {
    if (!values.count(name)) {
      fail(ErrorCode::Config, "checkpoint is missing parameter '" + name + "'");
    }
  }
}

}  // namespace cmadiff
