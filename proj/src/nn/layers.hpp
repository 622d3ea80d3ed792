// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Graph-building blocks composed from the autodiff primitives. Each block's
// create() registers its parameters under `prefix` in a ParamStore, so the
// same wiring code serves both fresh initialization and checkpoint reload.

#include <string>

#include "ad/graph.hpp"
#include "core/rng.hpp"
#include "nn/init.hpp"
#include "nn/param_store.hpp"

namespace cmadiff {

struct Linear {
  ad::NodePtr w;  // in x out
  ad::NodePtr b;  // 1 x out

  static Linear create(ParamStore& store, const std::string& prefix, int in, int out,
                       Rng& rng, bool zero_weights = false);

  // x: n x in -> n x out
  ad::NodePtr operator()(const ad::NodePtr& x) const;
};

struct LayerNorm {
  ad::NodePtr gamma;  // 1 x dim
  ad::NodePtr beta;   // 1 x dim
  double eps = 1e-5;

  static LayerNorm create(ParamStore& store, const std::string& prefix, int dim);

  ad::NodePtr operator()(const ad::NodePtr& x) const;
};

struct Conv1d {
  ad::NodePtr w;  // (kernel*cin) x cout
  ad::NodePtr b;  // 1 x cout
  int kernel = 3;

  static Conv1d create(ParamStore& store, const std::string& prefix, int cin, int cout,
                       int kernel, Rng& rng);

  // x: L x cin -> L x cout (stride 1, zero padding)
  ad::NodePtr operator()(const ad::NodePtr& x) const;
};

// Scaled dot-product attention: softmax(q k^T / sqrt(d_k)) v.
ad::NodePtr attention(const ad::NodePtr& q, const ad::NodePtr& k, const ad::NodePtr& v);

// Single-head attention with learned projections; query and key/value inputs
// may have different widths.
struct AttentionBlock {
  Linear wq, wk, wv, wo;

  static AttentionBlock create(ParamStore& store, const std::string& prefix, int q_in,
                               int kv_in, int dim, Rng& rng);

  ad::NodePtr operator()(const ad::NodePtr& q_in, const ad::NodePtr& kv_in) const;
};

// Pre-norm transformer encoder block: self-attention then a GELU MLP, both
// residual.
struct TransformerBlock {
  LayerNorm ln1, ln2;
  AttentionBlock attn;
  Linear ff1, ff2;

  static TransformerBlock create(ParamStore& store, const std::string& prefix, int dim,
                                 int ff_dim, Rng& rng);

  ad::NodePtr operator()(const ad::NodePtr& x) const;
};

// Row-wise L2 normalization to unit norm.
ad::NodePtr l2_normalize_rows(const ad::NodePtr& x);

}  // namespace cmadiff
