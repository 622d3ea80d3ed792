// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <map>
#include <utility>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "grad_check.hpp"

using namespace cmadiff;
using namespace cmadiff::ad;
using cmadiff::testsupport::check_gradients;

namespace {

Rng& test_rng() {
  static Rng rng(0x5eedULL);
  return rng;
}

NodePtr rparam(int rows, int cols, double scale = 1.0) {
  return param(test_rng().normal_matrix(rows, cols) * scale);
}

// Projects any matrix output to a scalar with a fixed random weighting so
// every entry receives a distinct upstream gradient.
NodePtr to_scalar(const NodePtr& out) {
  static std::map<std::pair<Eigen::Index, Eigen::Index>, Mat> weights;
  auto key = std::make_pair(out->value.rows(), out->value.cols());
  auto it = weights.find(key);
  if (it == weights.end()) {
    it = weights.emplace(key, test_rng().normal_matrix(key.first, key.second)).first;
  }
  return sum_all(mul(out, constant(it->second)));
}

void expect_grads_match(const std::vector<NodePtr>& leaves,
                        const std::function<NodePtr()>& build) {
  const auto result = check_gradients(leaves, build);
  CHECK_MESSAGE(result.ok(), "failed " << result.failed << "/" << result.checked
                                       << " entries, worst rel " << result.worst_rel
                                       << " at " << result.worst_at);
}

}  // namespace

TEST_CASE("elementwise arithmetic gradients") {
  auto a = rparam(3, 4);
  auto b = rparam(3, 4);
  expect_grads_match({a, b}, [&] { return to_scalar(add(a, b)); });
  expect_grads_match({a, b}, [&] { return to_scalar(sub(a, b)); });
  expect_grads_match({a, b}, [&] { return to_scalar(mul(a, b)); });
  auto denom = param((test_rng().normal_matrix(3, 4).cwiseAbs().array() + 0.5).matrix());
  expect_grads_match({a, denom}, [&] { return to_scalar(cdiv(a, denom)); });
  expect_grads_match({a}, [&] { return to_scalar(scale(a, -1.7)); });
  expect_grads_match({a}, [&] { return to_scalar(add_scalar(a, 2.5)); });
  auto s = rparam(1, 1);
  expect_grads_match({a, s}, [&] { return to_scalar(mul_scalarvar(a, s)); });
}

TEST_CASE("matmul and transpose gradients") {
  auto a = rparam(3, 5);
  auto b = rparam(5, 2);
  expect_grads_match({a, b}, [&] { return to_scalar(matmul(a, b)); });
  expect_grads_match({a}, [&] { return to_scalar(transpose(a)); });
  CHECK_THROWS_AS(matmul(rparam(3, 4), rparam(3, 4)), Error);
}

TEST_CASE("nonlinearity gradients") {
  auto a = rparam(4, 3);
  expect_grads_match({a}, [&] { return to_scalar(exp_(a)); });
  auto pos = param((test_rng().normal_matrix(4, 3).cwiseAbs().array() + 0.3).matrix());
  expect_grads_match({pos}, [&] { return to_scalar(log_(pos)); });
  expect_grads_match({pos}, [&] { return to_scalar(sqrt_(pos)); });
  expect_grads_match({a}, [&] { return to_scalar(tanh_(a)); });
  expect_grads_match({a}, [&] { return to_scalar(sigmoid(a)); });
  expect_grads_match({a}, [&] { return to_scalar(gelu(a)); });
  expect_grads_match({a}, [&] { return to_scalar(softmax_rows(a)); });
}

TEST_CASE("clamp is identity inside the band and flat outside") {
  // keep entries away from the clamp edges so finite differences stay valid
  Mat v(2, 3);
  v << -5.0, -0.4, 0.0, 0.3, 2.0, 7.0;
  auto a = param(v);
  expect_grads_match({a}, [&] { return to_scalar(clamp(a, -1.0, 1.0)); });
  auto out = clamp(a, -1.0, 1.0);
  CHECK(out->value(0, 0) == -1.0);
  CHECK(out->value(1, 2) == 1.0);
  CHECK(out->value(0, 1) == -0.4);
}

TEST_CASE("reduction gradients") {
  auto a = rparam(4, 3);
  expect_grads_match({a}, [&] { return sum_all(a); });
  expect_grads_match({a}, [&] { return mean_all(a); });
  expect_grads_match({a}, [&] { return to_scalar(row_sum(a)); });
  expect_grads_match({a}, [&] { return to_scalar(col_sum(a)); });
}

TEST_CASE("broadcast gradients") {
  auto a = rparam(4, 3);
  auto row = rparam(1, 3);
  auto col = rparam(4, 1);
  expect_grads_match({a, row}, [&] { return to_scalar(add_rowvec(a, row)); });
  expect_grads_match({a, row}, [&] { return to_scalar(mul_rowvec(a, row)); });
  expect_grads_match({a, col}, [&] { return to_scalar(mul_colvec(a, col)); });
}

TEST_CASE("shape op gradients") {
  auto a = rparam(4, 3);
  auto b = rparam(2, 3);
  auto c = rparam(4, 2);
  expect_grads_match({a, b}, [&] { return to_scalar(concat_rows(a, b)); });
  expect_grads_match({a, c}, [&] { return to_scalar(concat_cols(a, c)); });
  expect_grads_match({a}, [&] { return to_scalar(slice_rows(a, 1, 2)); });
  expect_grads_match({a}, [&] { return to_scalar(slice_cols(a, 1, 2)); });
  // duplicate gather indices must accumulate, not overwrite
  expect_grads_match({a}, [&] { return to_scalar(gather_rows(a, {2, 0, 2, 3})); });
  auto sq = rparam(4, 4);
  expect_grads_match({sq}, [&] { return to_scalar(take_diag(sq)); });
  expect_grads_match({a}, [&] { return to_scalar(downsample_rows2(a)); });
  expect_grads_match({a}, [&] { return to_scalar(upsample_rows2(a)); });
}

TEST_CASE("conv1d gradients (same padding, odd kernel)") {
  const int length = 5, cin = 2, cout = 3, kernel = 3;
  auto x = rparam(length, cin);
  auto w = rparam(kernel * cin, cout, 0.7);
  auto b = rparam(1, cout);
  expect_grads_match({x, w, b}, [&] { return to_scalar(conv1d(x, w, b, kernel)); });
  SUBCASE("kernel 1 reduces to a per-position linear map") {
    auto w1 = rparam(cin, cout);
    auto b1 = rparam(1, cout);
    const auto out = conv1d(x, w1, b1, 1);
    const Mat expected =
        (x->value * w1->value).rowwise() + b1->value.row(0);
    CHECK((out->value - expected).cwiseAbs().maxCoeff() < 1e-12);
    expect_grads_match({x, w1, b1}, [&] { return to_scalar(conv1d(x, w1, b1, 1)); });
  }
}

TEST_CASE("composite graph: two-layer network with every wiring style") {
  auto x = rparam(6, 4);
  auto w1 = rparam(4, 8, 0.5);
  auto b1 = rparam(1, 8);
  auto w2 = rparam(8, 2, 0.5);
  auto build = [&] {
    auto h = gelu(add_rowvec(matmul(x, w1), b1));
    auto y = tanh_(matmul(h, w2));
    return mean_all(mul(y, y));
  };
  expect_grads_match({x, w1, b1, w2}, build);
}

TEST_CASE("backward mechanics") {
  SUBCASE("constants receive no gradient") {
    auto c = constant(Mat::Ones(2, 2));
    auto p = rparam(2, 2);
    auto root = sum_all(mul(c, p));
    backward(root);
    CHECK(c->grad.size() == 0);
    CHECK(p->grad.size() == 4);
  }
  SUBCASE("non-scalar root is rejected") {
    auto p = rparam(2, 2);
    CHECK_THROWS_AS(backward(p), Error);
  }
  SUBCASE("diamond-shaped reuse accumulates both paths") {
    auto p = param(Mat::Constant(1, 1, 0.7));
    auto left = exp_(p);
    auto right = mul(p, p);
    auto root = sum_all(add(left, right));
    backward(root);
    CHECK(p->grad(0, 0) == doctest::Approx(std::exp(0.7) + 2 * 0.7).epsilon(1e-12));
  }
  SUBCASE("repeated backward calls do not double-count") {
    auto p = param(Mat::Constant(1, 1, 2.0));
    auto build = [&] { return sum_all(mul(p, p)); };
    auto r1 = build();
    backward(r1);
    const double first = p->grad(0, 0);
    auto r2 = build();
    backward(r2);
    CHECK(p->grad(0, 0) == doctest::Approx(first).epsilon(1e-15));
  }
}
