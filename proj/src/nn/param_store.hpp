// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <string>

#include "ad/graph.hpp"

namespace cmadiff {

// Named trainable parameters. Nodes persist across training steps; graphs
// rebuilt per step reference them as leaves. std::map keeps iteration (and
// thus optimizer and checkpoint order) deterministic.
class ParamStore {
 public:
  // Creates the parameter with `init` when absent; otherwise returns the
  // existing node after verifying its shape, so model wiring code can run
  // identically over a freshly seeded store or one filled from a checkpoint.
  ad::NodePtr get_or_create(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                            const std::function<ad::Mat()>& init);

  ad::NodePtr get(const std::string& name) const;
  bool has(const std::string& name) const { return params_.count(name) > 0; }

  const std::map<std::string, ad::NodePtr>& items() const { return params_; }
  size_t scalar_count() const;

  std::map<std::string, ad::Mat> values() const;
  // Overwrites matching parameters; unknown names or shape mismatches fail
  // with the offending name and dimensions.
  void load_values(const std::map<std::string, ad::Mat>& values);

 private:
  std::map<std::string, ad::NodePtr> params_;
};

}  // namespace cmadiff
