// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "ad/graph.hpp"

#include <cmath>
#include <unordered_set>
#include <utility>

#include "core/error.hpp"

namespace cmadiff::ad {

namespace {

bool any_grad(const NodePtr& a) { return a->requires_grad; }
bool any_grad(const NodePtr& a, const NodePtr& b) {
  return a->requires_grad || b->requires_grad;
}
bool any_grad(const NodePtr& a, const NodePtr& b, const NodePtr& c) {
  return a->requires_grad || b->requires_grad || c->requires_grad;
}

NodePtr make(Mat value, std::vector<NodePtr> parents,
             std::function<void(const Node&)> backward_fn, bool needs_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = needs_grad;
  if (needs_grad) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return n;
}

void check_same_shape(const NodePtr& a, const NodePtr& b, const char* op) {
  if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols()) {
    fail(ErrorCode::ShapeMismatch,
         std::string(op) + ": shapes " + std::to_string(a->value.rows()) + "x" +
             std::to_string(a->value.cols()) + " and " + std::to_string(b->value.rows()) +
             "x" + std::to_string(b->value.cols()) + " differ");
  }
}

}  // namespace

NodePtr constant(Mat value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

NodePtr constant_scalar(double value) {
  Mat m(1, 1);
  m(0, 0) = value;
  return constant(std::move(m));
}

NodePtr param(Mat value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a, b, "add");
  return make(a->value + b->value, {a, b},
              [a, b](const Node& n) {
                if (a->requires_grad) a->grad += n.grad;
                if (b->requires_grad) b->grad += n.grad;
              },
              any_grad(a, b));
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a, b, "sub");
  return make(a->value - b->value, {a, b},
              [a, b](const Node& n) {
                if (a->requires_grad) a->grad += n.grad;
                if (b->requires_grad) b->grad -= n.grad;
              },
              any_grad(a, b));
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a, b, "mul");
  return make(a->value.cwiseProduct(b->value), {a, b},
              [a, b](const Node& n) {
                if (a->requires_grad) a->grad += n.grad.cwiseProduct(b->value);
                if (b->requires_grad) b->grad += n.grad.cwiseProduct(a->value);
              },
              any_grad(a, b));
}

NodePtr cdiv(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a, b, "cdiv");
  return make(a->value.cwiseQuotient(b->value), {a, b},
              [a, b](const Node& n) {
                if (a->requires_grad) a->grad += n.grad.cwiseQuotient(b->value);
                if (b->requires_grad) {
                  b->grad -= n.grad.cwiseProduct(a->value)
                                 .cwiseQuotient(b->value.cwiseProduct(b->value));
                }
              },
              any_grad(a, b));
}

NodePtr scale(const NodePtr& a, double s) {
  return make(a->value * s, {a},
              [a, s](const Node& n) {
                if (a->requires_grad) a->grad += s * n.grad;
              },
              any_grad(a));
}

NodePtr add_scalar(const NodePtr& a, double s) {
  return make((a->value.array() + s).matrix(), {a},
              [a](const Node& n) {
                if (a->requires_grad) a->grad += n.grad;
              },
              any_grad(a));
}

NodePtr mul_scalarvar(const NodePtr& a, const NodePtr& s) {
  if (s->value.size() != 1) fail(ErrorCode::ShapeMismatch, "mul_scalarvar: s must be 1x1");
  const double sv = s->value(0, 0);
  return make(a->value * sv, {a, s},
              [a, s, sv](const Node& n) {
                if (a->requires_grad) a->grad += sv * n.grad;
                if (s->requires_grad) s->grad(0, 0) += n.grad.cwiseProduct(a->value).sum();
              },
              any_grad(a, s));
}

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
  if (a->value.cols() != b->value.rows()) {
    fail(ErrorCode::ShapeMismatch,
         "matmul: inner dimensions " + std::to_string(a->value.cols()) + " and " +
             std::to_string(b->value.rows()) + " differ");
  }
  return make(a->value * b->value, {a, b},
              [a, b](const Node& n) {
                if (a->requires_grad) a->grad.noalias() += n.grad * b->value.transpose();
                if (b->requires_grad) b->grad.noalias() += a->value.transpose() * n.grad;
              },
              any_grad(a, b));
}

NodePtr transpose(const NodePtr& a) {
  return make(a->value.transpose(), {a},
              [a](const Node& n) {
                if (a->requires_grad) a->grad += n.grad.transpose();
              },
              any_grad(a));
}

NodePtr exp_(const NodePtr& a) {
  Mat y = a->value.array().exp().matrix();
  return make(y, {a},
              [a, y](const Node& n) {
                if (a->requires_grad) a->grad += n.grad.cwiseProduct(y);
              },
              any_grad(a));
}

NodePtr log_(const NodePtr& a) {
  return make(a->value.array().log().matrix(), {a},
              [a](const Node& n) {
                if (a->requires_grad) a->grad += n.grad.cwiseQuotient(a->value);
              },
              any_grad(a));
}

NodePtr sqrt_(const NodePtr& a) {
  Mat y = a->value.array().sqrt().matrix();
  return make(y, {a},
              [a, y](const Node& n) {
                if (a->requires_grad) {
                  a->grad += (n.grad.array() * 0.5 / y.array()).matrix();
                }
              },
              any_grad(a));
}

NodePtr tanh_(const NodePtr& a) {
  Mat y = a->value.array().tanh().matrix();
  return make(y, {a},
              [a, y](const Node& n) {
                if (a->requires_grad) {
                  a->grad += (n.grad.array() * (1.0 - y.array().square())).matrix();
                }
              },
              any_grad(a));
}

NodePtr sigmoid(const NodePtr& a) {
  Mat y = (1.0 / (1.0 + (-a->value.array()).exp())).matrix();
  return make(y, {a},
              [a, y](const Node& n) {
                if (a->requires_grad) {
                  a->grad += (n.grad.array() * y.array() * (1.0 - y.array())).matrix();
                }
              },
              any_grad(a));
}

namespace {
inline double normal_cdf(double v) { return 0.5 * (1.0 + std::erf(v * 0.7071067811865475244)); }
inline double normal_pdf(double v) { return std::exp(-0.5 * v * v) * 0.3989422804014326779; }
}  // namespace

NodePtr gelu(const NodePtr& a) {
  Mat x = a->value;
  Mat y = (x.array() * x.array().unaryExpr([](double v) { return normal_cdf(v); })).matrix();
  return make(y, {a},
              [a, x](const Node& n) {
                if (!a->requires_grad) return;
                auto cdf = x.array().unaryExpr([](double v) { return normal_cdf(v); });
                auto pdf = x.array().unaryExpr([](double v) { return normal_pdf(v); });
                a->grad += (n.grad.array() * (cdf + x.array() * pdf)).matrix();
              },
              any_grad(a));
}

NodePtr softmax_rows(const NodePtr& a) {
  Mat y = a->value;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double m = y.row(i).maxCoeff();
    y.row(i) = (y.row(i).array() - m).exp();
    y.row(i) /= y.row(i).sum();
  }
  return make(y, {a},
              [a, y](const Node& n) {
                if (!a->requires_grad) return;
                for (Eigen::Index i = 0; i < y.rows(); ++i) {
                  const double dot = (n.grad.row(i).array() * y.row(i).array()).sum();
                  a->grad.row(i).array() += y.row(i).array() * (n.grad.row(i).array() - dot);
                }
              },
              any_grad(a));
}

NodePtr clamp(const NodePtr& a, double lo, double hi) {
  Mat y = a->value.array().max(lo).min(hi).matrix();
  return make(y, {a},
              [a, lo, hi](const Node& n) {
                if (!a->requires_grad) return;
                auto inside = (a->value.array() >= lo && a->value.array() <= hi);
                a->grad += (inside.cast<double>() * n.grad.array()).matrix();
              },
              any_grad(a));
}

NodePtr sum_all(const NodePtr& a) {
  Mat y(1, 1);
  y(0, 0) = a->value.sum();
  return make(y, {a},
              [a](const Node& n) {
                if (a->requires_grad) a->grad.array() += n.grad(0, 0);
              },
              any_grad(a));
}

NodePtr mean_all(const NodePtr& a) {
  const double inv = 1.0 / static_cast<double>(a->value.size());
  Mat y(1, 1);
  y(0, 0) = a->value.sum() * inv;
  return make(y, {a},
              [a, inv](const Node& n) {
                if (a->requires_grad) a->grad.array() += n.grad(0, 0) * inv;
              },
              any_grad(a));
}

NodePtr row_sum(const NodePtr& a) {
  Mat y = a->value.rowwise().sum();
  return make(y, {a},
              [a](const Node& n) {
                if (a->requires_grad) a->grad.colwise() += n.grad.col(0);
              },
              any_grad(a));
}

NodePtr col_sum(const NodePtr& a) {
  Mat y = a->value.colwise().sum();
  return make(y, {a},
              [a](const Node& n) {
                if (a->requires_grad) a->grad.rowwise() += n.grad.row(0);
              },
              any_grad(a));
}

NodePtr add_rowvec(const NodePtr& a, const NodePtr& v) {
  if (v->value.rows() != 1 || v->value.cols() != a->value.cols()) {
    fail(ErrorCode::ShapeMismatch, "add_rowvec: v must be 1x" + std::to_string(a->value.cols()));
  }
  Mat y = a->value.rowwise() + v->value.row(0);
  return make(y, {a, v},
              [a, v](const Node& n) {
                if (a->requires_grad) a->grad += n.grad;
                if (v->requires_grad) v->grad.row(0) += n.grad.colwise().sum();
              },
              any_grad(a, v));
}

NodePtr mul_rowvec(const NodePtr& a, const NodePtr& v) {
  if (v->value.rows() != 1 || v->value.cols() != a->value.cols()) {
    fail(ErrorCode::ShapeMismatch, "mul_rowvec: v must be 1x" + std::to_string(a->value.cols()));
  }
  Mat y = (a->value.array().rowwise() * v->value.row(0).array()).matrix();
  return make(y, {a, v},
              [a, v](const Node& n) {
                if (a->requires_grad) {
                  a->grad += (n.grad.array().rowwise() * v->value.row(0).array()).matrix();
                }
                if (v->requires_grad) {
                  v->grad.row(0) += n.grad.cwiseProduct(a->value).colwise().sum();
                }
              },
              any_grad(a, v));
}

NodePtr mul_colvec(const NodePtr& a, const NodePtr& v) {
  if (v->value.cols() != 1 || v->value.rows() != a->value.rows()) {
    fail(ErrorCode::ShapeMismatch, "mul_colvec: v must be " + std::to_string(a->value.rows()) + "x1");
  }
  Mat y = (a->value.array().colwise() * v->value.col(0).array()).matrix();
  return make(y, {a, v},
              [a, v](const Node& n) {
                if (a->requires_grad) {
                  a->grad += (n.grad.array().colwise() * v->value.col(0).array()).matrix();
                }
                if (v->requires_grad) {
                  v->grad.col(0) += n.grad.cwiseProduct(a->value).rowwise().sum();
                }
              },
              any_grad(a, v));
}

NodePtr concat_rows(const NodePtr& a, const NodePtr& b) {
  if (a->value.cols() != b->value.cols()) {
    fail(ErrorCode::ShapeMismatch, "concat_rows: column counts differ");
  }
  Mat y(a->value.rows() + b->value.rows(), a->value.cols());
  y << a->value, b->value;
  const Eigen::Index na = a->value.rows();
  return make(y, {a, b},
              [a, b, na](const Node& n) {
                if (a->requires_grad) a->grad += n.grad.topRows(na);
                if (b->requires_grad) b->grad += n.grad.bottomRows(n.grad.rows() - na);
              },
              any_grad(a, b));
}

NodePtr concat_cols(const NodePtr& a, const NodePtr& b) {
  if (a->value.rows() != b->value.rows()) {
    fail(ErrorCode::ShapeMismatch, "concat_cols: row counts differ");
  }
  Mat y(a->value.rows(), a->value.cols() + b->value.cols());
  y << a->value, b->value;
  const Eigen::Index ca = a->value.cols();
  return make(y, {a, b},
              [a, b, ca](const Node& n) {
                if (a->requires_grad) a->grad += n.grad.leftCols(ca);
                if (b->requires_grad) b->grad += n.grad.rightCols(n.grad.cols() - ca);
              },
              any_grad(a, b));
}

NodePtr slice_rows(const NodePtr& a, int start, int count) {
  if (start < 0 || count < 0 || start + count > a->value.rows()) {
    fail(ErrorCode::ShapeMismatch, "slice_rows: range [" + std::to_string(start) + ", " +
                                       std::to_string(start + count) + ") out of " +
                                       std::to_string(a->value.rows()) + " rows");
  }
  Mat y = a->value.middleRows(start, count);
  return make(y, {a},
              [a, start, count](const Node& n) {
                if (a->requires_grad) a->grad.middleRows(start, count) += n.grad;
              },
              any_grad(a));
}

NodePtr slice_cols(const NodePtr& a, int start, int count) {
  if (start < 0 || count < 0 || start + count > a->value.cols()) {
    fail(ErrorCode::ShapeMismatch, "slice_cols: range [" + std::to_string(start) + ", " +
                                       std::to_string(start + count) + ") out of " +
                                       std::to_string(a->value.cols()) + " columns");
  }
  Mat y = a->value.middleCols(start, count);
  return make(y, {a},
              [a, start, count](const Node& n) {
                if (a->requires_grad) a->grad.middleCols(start, count) += n.grad;
              },
              any_grad(a));
}

NodePtr gather_rows(const NodePtr& a, std::vector<int> indices) {
  Mat y(static_cast<Eigen::Index>(indices.size()), a->value.cols());
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= a->value.rows()) {
      fail(ErrorCode::ShapeMismatch, "gather_rows: index " + std::to_string(indices[i]) +
                                         " out of " + std::to_string(a->value.rows()) + " rows");
    }
    y.row(static_cast<Eigen::Index>(i)) = a->value.row(indices[i]);
  }
  return make(y, {a},
              [a, indices = std::move(indices)](const Node& n) {
                if (!a->requires_grad) return;
                for (size_t i = 0; i < indices.size(); ++i) {
                  a->grad.row(indices[i]) += n.grad.row(static_cast<Eigen::Index>(i));
                }
              },
              any_grad(a));
}

NodePtr take_diag(const NodePtr& a) {
  if (a->value.rows() != a->value.cols()) {
    fail(ErrorCode::ShapeMismatch, "take_diag: matrix is not square");
  }
  Mat y = a->value.diagonal();
  return make(y, {a},
              [a](const Node& n) {
                if (a->requires_grad) a->grad.diagonal() += n.grad.col(0);
              },
              any_grad(a));
}

NodePtr downsample_rows2(const NodePtr& a) {
  if (a->value.rows() % 2 != 0) {
    fail(ErrorCode::ShapeMismatch, "downsample_rows2: row count " +
                                       std::to_string(a->value.rows()) + " is odd");
  }
  const Eigen::Index half = a->value.rows() / 2;
  Mat y(half, a->value.cols());
  for (Eigen::Index i = 0; i < half; ++i) {
    y.row(i) = 0.5 * (a->value.row(2 * i) + a->value.row(2 * i + 1));
  }
  return make(y, {a},
              [a, half](const Node& n) {
                if (!a->requires_grad) return;
                for (Eigen::Index i = 0; i < half; ++i) {
                  a->grad.row(2 * i) += 0.5 * n.grad.row(i);
                  a->grad.row(2 * i + 1) += 0.5 * n.grad.row(i);
                }
              },
              any_grad(a));
}

NodePtr upsample_rows2(const NodePtr& a) {
  const Eigen::Index rows = a->value.rows();
  Mat y(2 * rows, a->value.cols());
  for (Eigen::Index i = 0; i < rows; ++i) {
    y.row(2 * i) = a->value.row(i);
    y.row(2 * i + 1) = a->value.row(i);
  }
  return make(y, {a},
              [a, rows](const Node& n) {
                if (!a->requires_grad) return;
                for (Eigen::Index i = 0; i < rows; ++i) {
                  a->grad.row(i) += n.grad.row(2 * i) + n.grad.row(2 * i + 1);
                }
              },
              any_grad(a));
}

NodePtr conv1d(const NodePtr& x, const NodePtr& w, const NodePtr& b, int kernel) {
  const Eigen::Index L = x->value.rows();
  const Eigen::Index cin = x->value.cols();
  if (kernel < 1 || kernel % 2 == 0) {
    fail(ErrorCode::InvalidArgument, "conv1d: kernel must be odd and positive");
  }
  if (w->value.rows() != kernel * cin) {
    fail(ErrorCode::ShapeMismatch, "conv1d: weight rows " + std::to_string(w->value.rows()) +
                                       " != kernel*cin = " + std::to_string(kernel * cin));
  }
  const Eigen::Index cout = w->value.cols();
  if (b->value.rows() != 1 || b->value.cols() != cout) {
    fail(ErrorCode::ShapeMismatch, "conv1d: bias must be 1x" + std::to_string(cout));
  }
  const int half = kernel / 2;

  Mat y = Mat::Zero(L, cout);
  y.rowwise() += b->value.row(0);
  for (int k = 0; k < kernel; ++k) {
    const int d = k - half;  // source offset: y[i] += x[i+d] * Wk
    const Eigen::Index lo_dst = std::max<Eigen::Index>(0, -d);
    const Eigen::Index hi_dst = std::min<Eigen::Index>(L, L - d);
    if (lo_dst >= hi_dst) continue;
    const Eigen::Index count = hi_dst - lo_dst;
    y.middleRows(lo_dst, count).noalias() +=
        x->value.middleRows(lo_dst + d, count) * w->value.middleRows(k * cin, cin);
  }

  return make(y, {x, w, b},
              [x, w, b, kernel, half, L, cin](const Node& n) {
                if (b->requires_grad) b->grad.row(0) += n.grad.colwise().sum();
                for (int k = 0; k < kernel; ++k) {
                  const int d = k - half;
                  const Eigen::Index lo_dst = std::max<Eigen::Index>(0, -d);
                  const Eigen::Index hi_dst = std::min<Eigen::Index>(L, L - d);
                  if (lo_dst >= hi_dst) continue;
                  const Eigen::Index count = hi_dst - lo_dst;
                  if (x->requires_grad) {
                    x->grad.middleRows(lo_dst + d, count).noalias() +=
                        n.grad.middleRows(lo_dst, count) *
                        w->value.middleRows(k * cin, cin).transpose();
                  }
                  if (w->requires_grad) {
                    w->grad.middleRows(k * cin, cin).noalias() +=
                        x->value.middleRows(lo_dst + d, count).transpose() *
                        n.grad.middleRows(lo_dst, count);
                  }
                }
              },
              any_grad(x, w, b));
}

void backward(const NodePtr& root) {
  if (root->value.size() != 1) {
    fail(ErrorCode::InvalidArgument, "backward: root must be a 1x1 scalar");
  }

  // Iterative post-order DFS; recursion would overflow on deep graphs.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next_child] = stack.back();
    if (next_child < node->parents.size()) {
      Node* child = node->parents[next_child].get();
      ++next_child;
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    n->grad = Mat::Zero(n->value.rows(), n->value.cols());
  }
  root->grad(0, 0) = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

}  // namespace cmadiff::ad
