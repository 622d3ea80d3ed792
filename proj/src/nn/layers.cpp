// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/layers.hpp"

#include <cmath>

namespace cmadiff {

using ad::NodePtr;

Linear Linear::create(ParamStore& store, const std::string& prefix, int in, int out,
                      Rng& rng, bool zero_weights) {
  Linear l;
  l.w = store.get_or_create(prefix + ".w", in, out, [&] {
    return zero_weights ? zeros_init(in, out) : uniform_fan_in(in, out, rng);
  });
  l.b = store.get_or_create(prefix + ".b", 1, out, [&] { return zeros_init(1, out); });
  return l;
}

NodePtr Linear::operator()(const NodePtr& x) const {
  return ad::add_rowvec(ad::matmul(x, w), b);
}

LayerNorm LayerNorm::create(ParamStore& store, const std::string& prefix, int dim) {
  LayerNorm ln;
  ln.gamma = store.get_or_create(prefix + ".gamma", 1, dim, [&] { return ones_init(1, dim); });
  ln.beta = store.get_or_create(prefix + ".beta", 1, dim, [&] { return zeros_init(1, dim); });
  return ln;
}

NodePtr LayerNorm::operator()(const NodePtr& x) const {
  const Eigen::Index n = x->value.rows();
  const Eigen::Index m = x->value.cols();
  auto ones_row = ad::constant(ad::Mat::Ones(1, m));
  auto ones_col = ad::constant(ad::Mat::Ones(n, 1));
  auto mean = ad::scale(ad::row_sum(x), 1.0 / static_cast<double>(m));       // n x 1
  auto center = ad::sub(x, ad::matmul(mean, ones_row));                      // n x m
  auto var = ad::scale(ad::row_sum(ad::mul(center, center)), 1.0 / static_cast<double>(m));
  auto inv = ad::cdiv(ones_col, ad::sqrt_(ad::add_scalar(var, eps)));        // n x 1
  auto normed = ad::mul_colvec(center, inv);
  return ad::add_rowvec(ad::mul_rowvec(normed, gamma), beta);
}

Conv1d Conv1d::create(ParamStore& store, const std::string& prefix, int cin, int cout,
                      int kernel, Rng& rng) {
  Conv1d c;
  c.kernel = kernel;
  c.w = store.get_or_create(prefix + ".w", static_cast<Eigen::Index>(kernel) * cin, cout,
                            [&] { return uniform_fan_in(kernel * cin, cout, rng); });
  c.b = store.get_or_create(prefix + ".b", 1, cout, [&] { return zeros_init(1, cout); });
  return c;
}

NodePtr Conv1d::operator()(const NodePtr& x) const { return ad::conv1d(x, w, b, kernel); }

NodePtr attention(const NodePtr& q, const NodePtr& k, const NodePtr& v) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(k->value.cols()));
  auto scores = ad::scale(ad::matmul(q, ad::transpose(k)), scale);
  return ad::matmul(ad::softmax_rows(scores), v);
}

AttentionBlock AttentionBlock::create(ParamStore& store, const std::string& prefix, int q_in,
                                      int kv_in, int dim, Rng& rng) {
  AttentionBlock a;
  a.wq = Linear::create(store, prefix + ".q", q_in, dim, rng);
  a.wk = Linear::create(store, prefix + ".k", kv_in, dim, rng);
  a.wv = Linear::create(store, prefix + ".v", kv_in, dim, rng);
  a.wo = Linear::create(store, prefix + ".o", dim, dim, rng);
  return a;
}

NodePtr AttentionBlock::operator()(const NodePtr& q_in, const NodePtr& kv_in) const {
  return wo(attention(wq(q_in), wk(kv_in), wv(kv_in)));
}

TransformerBlock TransformerBlock::create(ParamStore& store, const std::string& prefix,
                                          int dim, int ff_dim, Rng& rng) {
  TransformerBlock t;
  t.ln1 = LayerNorm::create(store, prefix + ".ln1", dim);
  t.ln2 = LayerNorm::create(store, prefix + ".ln2", dim);
  t.attn = AttentionBlock::create(store, prefix + ".attn", dim, dim, dim, rng);
  t.ff1 = Linear::create(store, prefix + ".ff1", dim, ff_dim, rng);
  t.ff2 = Linear::create(store, prefix + ".ff2", ff_dim, dim, rng);
  return t;
}

NodePtr TransformerBlock::operator()(const NodePtr& x) const {
  auto normed = ln1(x);
  auto h = ad::add(x, attn(normed, normed));
  auto h2 = ad::add(h, ff2(ad::gelu(ff1(ln2(h)))));
  return h2;
}

NodePtr l2_normalize_rows(const NodePtr& x) {
  auto sq_norm = ad::row_sum(ad::mul(x, x));                      // n x 1
  auto norm = ad::sqrt_(ad::add_scalar(sq_norm, 1e-12));
  auto ones_col = ad::constant(ad::Mat::Ones(x->value.rows(), 1));
  return ad::mul_colvec(x, ad::cdiv(ones_col, norm));
}

}  // namespace cmadiff
