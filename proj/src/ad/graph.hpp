// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Define-by-run reverse-mode automatic differentiation over Eigen matrices.
//
// Ops eagerly compute values and record a backward closure; backward(root)
// topologically sorts the reachable graph (iteratively — graphs are deep) and
// accumulates gradients into every node with requires_grad. Graphs are
// rebuilt per step, so parameter values may be mutated freely between steps.

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

namespace cmadiff::ad {

using Mat = Eigen::MatrixXd;

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  Mat value;
  Mat grad;  // allocated by backward(); same shape as value
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(const Node&)> backward_fn;  // reads grad, writes parents' grads
};

NodePtr constant(Mat value);
NodePtr constant_scalar(double value);
NodePtr param(Mat value);  // differentiable leaf

// ---- arithmetic (elementwise unless stated) ----
NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr mul(const NodePtr& a, const NodePtr& b);
NodePtr cdiv(const NodePtr& a, const NodePtr& b);
NodePtr scale(const NodePtr& a, double s);
NodePtr add_scalar(const NodePtr& a, double s);
NodePtr mul_scalarvar(const NodePtr& a, const NodePtr& s);  // s is 1x1

// ---- linear algebra ----
NodePtr matmul(const NodePtr& a, const NodePtr& b);
NodePtr transpose(const NodePtr& a);

// ---- nonlinearities ----
NodePtr exp_(const NodePtr& a);
NodePtr log_(const NodePtr& a);
NodePtr sqrt_(const NodePtr& a);
NodePtr tanh_(const NodePtr& a);
NodePtr sigmoid(const NodePtr& a);
NodePtr gelu(const NodePtr& a);  // exact erf form
NodePtr softmax_rows(const NodePtr& a);
NodePtr clamp(const NodePtr& a, double lo, double hi);  // pass-through inside [lo, hi]

// ---- reductions ----
NodePtr sum_all(const NodePtr& a);   // 1x1
NodePtr mean_all(const NodePtr& a);  // 1x1
NodePtr row_sum(const NodePtr& a);   // n x 1
NodePtr col_sum(const NodePtr& a);   // 1 x m

// ---- broadcasts ----
NodePtr add_rowvec(const NodePtr& a, const NodePtr& v);  // v: 1 x m
NodePtr mul_rowvec(const NodePtr& a, const NodePtr& v);  // v: 1 x m
NodePtr mul_colvec(const NodePtr& a, const NodePtr& v);  // v: n x 1

// ---- shape ----
NodePtr concat_rows(const NodePtr& a, const NodePtr& b);
NodePtr concat_cols(const NodePtr& a, const NodePtr& b);
NodePtr slice_rows(const NodePtr& a, int start, int count);
NodePtr slice_cols(const NodePtr& a, int start, int count);
NodePtr gather_rows(const NodePtr& a, std::vector<int> indices);
NodePtr take_diag(const NodePtr& a);      // square a -> n x 1
NodePtr downsample_rows2(const NodePtr& a);  // mean of row pairs; rows even
NodePtr upsample_rows2(const NodePtr& a);    // repeat each row twice

// ---- sequence convolution ----
// x: L x Cin, w: (K*Cin) x Cout (block k is the Cin x Cout slice for tap k),
// b: 1 x Cout. Stride 1, zero ("same") padding, odd K.
NodePtr conv1d(const NodePtr& x, const NodePtr& w, const NodePtr& b, int kernel);

// Seeds root (must be 1x1) with gradient 1 and accumulates into every
// reachable differentiable node. Zeroes reachable grads first, so call once
// per constructed loss.
void backward(const NodePtr& root);

}  // namespace cmadiff::ad
