// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include "ad/graph.hpp"
#include "core/rng.hpp"

namespace cmadiff {

// Fan-in-scaled uniform in [-1/sqrt(rows), 1/sqrt(rows)] — the convention for
// weight matrices used as x*W and for convolution taps stacked along rows.
inline ad::Mat uniform_fan_in(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(rows));
  ad::Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return m;
}

inline ad::Mat normal_init(Eigen::Index rows, Eigen::Index cols, double std_dev, Rng& rng) {
  return std_dev * rng.normal_matrix(rows, cols);
}

inline ad::Mat zeros_init(Eigen::Index rows, Eigen::Index cols) {
  return ad::Mat::Zero(rows, cols);
}

inline ad::Mat ones_init(Eigen::Index rows, Eigen::Index cols) {
  return ad::Mat::Ones(rows, cols);
}

}  // namespace cmadiff
