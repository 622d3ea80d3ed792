// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/adam.hpp"

#include <cmath>

#include "core/error.hpp"

namespace cmadiff {

Adam::Adam(ParamStore& store, AdamConfig config) : store_(store), config_(config) {
  for (const auto& [name, node] : store_.items()) {
    m_.emplace(name, ad::Mat::Zero(node->value.rows(), node->value.cols()));
    v_.emplace(name, ad::Mat::Zero(node->value.rows(), node->value.cols()));
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (const auto& [name, node] : store_.items()) {
    if (node->grad.size() != node->value.size()) {
      // parameter unused by this loss graph; no update
      continue;
    }
    if (!node->grad.allFinite()) {
      fail(ErrorCode::Numeric, "non-finite gradient for parameter '" + name + "'");
    }
    ad::Mat& m = m_.at(name);
    ad::Mat& v = v_.at(name);
    m = config_.beta1 * m + (1.0 - config_.beta1) * node->grad;
    v = (config_.beta2 * v.array() + (1.0 - config_.beta2) * node->grad.array().square())
            .matrix();
    const ad::Mat m_hat = m / bc1;
    const ad::Mat v_hat = v / bc2;
    node->value.array() -= config_.lr * m_hat.array() / (v_hat.array().sqrt() + config_.eps);
    node->grad.resize(0, 0);  // consume, so a stale gradient is never reapplied
  }
}

}  // namespace cmadiff
