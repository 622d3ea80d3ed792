// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "ad/graph.hpp"
#include "nn/param_store.hpp"

namespace cmadiff {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Reads the gradients left on parameter nodes by
// backward(); call once per constructed loss graph.
class Adam {
 public:
  Adam(ParamStore& store, AdamConfig config);

  void step();

  void set_lr(double lr) { config_.lr = lr; }
  double lr() const { return config_.lr; }

 private:
  ParamStore& store_;
  AdamConfig config_;
  int64_t t_ = 0;
  std::map<std::string, ad::Mat> m_, v_;
};

}  // namespace cmadiff
