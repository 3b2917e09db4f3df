// Copyright (c) 2026 The lutlm Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "lutlm/gradcheck.hpp"
#include "lutlm/rng.hpp"
#include "lutlm/tape.hpp"

using namespace lutlm;

namespace {

Mat<double> random_mat(Rng& rng, Index r, Index c, double scale = 1.0) {
  Mat<double> m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
  return m;
}

// Gradient-checks a scalar objective built from leased leaf parameters.
// `build` must read the leaves in order and return the scalar loss.
using Builder = std::function<Var<double>(Tape<double>&, std::vector<Var<double>>&)>;

double fd_error(std::vector<Mat<double>>& params, const Builder& build, double step = 1e-5) {
  auto eval = [&]() {
    Tape<double> t;
    std::vector<Var<double>> leaves;
    leaves.reserve(params.size());
    for (auto& p : params) leaves.push_back(t.leaf(p));
    return build(t, leaves).value()(0, 0);
  };
  Tape<double> t;
  std::vector<Var<double>> leaves;
  for (auto& p : params) leaves.push_back(t.leaf(p));
  Var<double> loss = build(t, leaves);
  t.backward(loss);
  std::vector<Mat<double>> analytic;
  std::vector<FdParam> fps;
  for (std::size_t i = 0; i < params.size(); ++i) {
    analytic.push_back(t.grad(leaves[i].id));
    fps.push_back({"p" + std::to_string(i), &params[i]});
  }
  return finite_difference_check(eval, fps, analytic, step).max_rel_error;
}

}  // namespace

TEST_CASE("softmax closed forms") {
  Tape<double> t;
  Mat<double> x(1, 2);
  x << 0.0, 0.0;
  auto p = softmax_rows(t.leaf(x));
  CHECK(p.value()(0, 0) == doctest::Approx(0.5));
  CHECK(p.value()(0, 1) == doctest::Approx(0.5));

  Mat<double> y(1, 2);
  y << std::log(2.0), 0.0;
  auto q = softmax_rows(t.leaf(y));
  CHECK(q.value()(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(q.value()(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax shift invariance and overflow guarding") {
  Tape<double> t;
  Mat<double> x(1, 3);
  x << 1.0, 2.0, 3.0;
  Mat<double> shifted = x.array() + 1000.0;
  auto a = softmax_rows(t.leaf(x));
  auto b = softmax_rows(t.leaf(shifted));
  for (Index j = 0; j < 3; ++j) {
    CHECK(a.value()(0, j) == doctest::Approx(b.value()(0, j)).epsilon(1e-12));
  }
}

TEST_CASE("softmax rows sum to one up to magnitude 1e4") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Mat<double> xd = random_mat(rng, 4, 8, 1e4);
    Tape<double> td;
    auto pd = softmax_rows(td.leaf(xd));
    Mat<float> xf = xd.cast<float>();
    Tape<float> tf;
    auto pf = softmax_rows(tf.leaf(xf));
    for (Index r = 0; r < 4; ++r) {
      CHECK(std::abs(pd.value().row(r).sum() - 1.0) < 1e-6);
      CHECK(std::abs(static_cast<double>(pf.value().row(r).sum()) - 1.0) < 1e-6);
      CHECK((pd.value().row(r).array() >= 0.0).all());
    }
  }
}

TEST_CASE("softmax rejects empty axis") {
  Tape<double> t;
  Mat<double> x(2, 0);
  CHECK_THROWS_AS((void)softmax_rows(t.leaf(x)), ShapeError);
}

TEST_CASE("layer norm closed forms") {
  Tape<double> t;
  Mat<double> ones_row(1, 3);
  ones_row << 1.0, 1.0, 1.0;
  auto gain = t.leaf(Mat<double>::Ones(1, 3));
  auto shift = t.leaf(Mat<double>::Zero(1, 3));
  auto y = layer_norm_rows(t.leaf(ones_row), gain, shift, 1e-5);
  for (Index j = 0; j < 3; ++j) CHECK(y.value()(0, j) == doctest::Approx(0.0));

  Mat<double> pm(1, 2);
  pm << 1.0, -1.0;
  auto g2 = t.leaf(Mat<double>::Ones(1, 2));
  auto s2 = t.leaf(Mat<double>::Zero(1, 2));
  auto z = layer_norm_rows(t.leaf(pm), g2, s2, 1e-12);
  CHECK(z.value()(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(z.value()(0, 1) == doctest::Approx(-1.0).epsilon(1e-6));

  Rng rng(3);
  Mat<double> any = random_mat(rng, 2, 4);
  auto g0 = t.leaf(Mat<double>::Zero(1, 4));
  Mat<double> sv = Mat<double>::Constant(1, 4, 2.5);
  auto s3 = t.leaf(sv);
  auto w = layer_norm_rows(t.leaf(any), g0, s3, 1e-5);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 4; ++j) CHECK(w.value()(i, j) == doctest::Approx(2.5));
}

TEST_CASE("gradients: analytic closed forms") {
  // f(x) = x^2 at x = 3 -> 6
  Tape<double> t;
  auto x = t.scalar(3.0);
  auto f = mul(x, x);
  t.backward(f);
  CHECK(t.grad(x.id)(0, 0) == doctest::Approx(6.0));

  // f constant in x -> gradient 0
  Tape<double> t2;
  auto x2 = t2.scalar(3.0);
  auto c = t2.scalar(5.0);
  auto f2 = mul(c, c);
  t2.backward(f2);
  CHECK(t2.grad(x2.id)(0, 0) == 0.0);
}

TEST_CASE("gradients: cross-entropy of softmax logits matches p - onehot") {
  Mat<double> logits(1, 2);
  logits << 1.0, 0.0;
  Tape<double> t;
  auto lv = t.leaf(logits);
  auto ce = cross_entropy_rows(lv, {0});
  t.backward(ce);
  const double p0 = std::exp(1.0) / (std::exp(1.0) + 1.0);
  CHECK(t.grad(lv.id)(0, 0) == doctest::Approx(p0 - 1.0).epsilon(1e-12));
  CHECK(t.grad(lv.id)(0, 1) == doctest::Approx(1.0 - p0).epsilon(1e-12));

  // the same gradient verified by the finite-difference oracle at 1e-5
  std::vector<Mat<double>> params{logits};
  const double err = fd_error(
      params,
      [](Tape<double>& tt, std::vector<Var<double>>& leaves) {
        return cross_entropy_rows(leaves[0], {0});
      },
      1e-5);
  CHECK(err < 1e-8);
}

TEST_CASE("backward rejects non-scalar loss and names NaN primitives") {
  Tape<double> t;
  auto m = t.leaf(Mat<double>::Ones(2, 2));
  CHECK_THROWS_AS(t.backward(m), NumericError);

  Mat<double> bad(1, 1);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_WITH_AS((void)t.leaf(bad, "poisoned"),
                       "non-finite values produced by primitive 'poisoned'", NumericError);
}

TEST_CASE("shape mismatches are errors, not broadcasts") {
  Tape<double> t;
  auto a = t.leaf(Mat<double>::Ones(2, 3));
  auto b = t.leaf(Mat<double>::Ones(3, 2));
  CHECK_THROWS_AS((void)add(a, b), ShapeError);
  CHECK_THROWS_AS((void)mul(a, b), ShapeError);
  CHECK_THROWS_AS((void)matmul(a, a), ShapeError);
  auto v = t.leaf(Mat<double>::Ones(1, 2));
  CHECK_THROWS_AS((void)add_rowvec(a, v), ShapeError);
  CHECK_THROWS_AS((void)log_op(t.leaf(Mat<double>::Constant(1, 1, -1.0))), NumericError);
}

TEST_CASE("finite-difference harness: quadratic form error < 1e-8") {
  Rng rng(11);
  Mat<double> a = random_mat(rng, 4, 4);
  std::vector<Mat<double>> params{random_mat(rng, 1, 4)};
  const double err = fd_error(
      params,
      [a](Tape<double>& t, std::vector<Var<double>>& leaves) {
        auto theta = leaves[0];  // 1x4
        auto at = t.constant(a);
        return matmul_nt(matmul(theta, at), theta);  // theta A theta^T
      },
      1e-5);
  CHECK(err < 1e-8);
}

TEST_CASE("finite-difference harness: doubled gradient reported >= 0.4") {
  Rng rng(13);
  Mat<double> theta = random_mat(rng, 3, 1).array() + 2.0;  // keep away from zero
  auto eval = [&]() { return theta.array().square().sum(); };
  Mat<double> doubled = 4.0 * theta;  // true gradient is 2*theta
  const auto report = finite_difference_check(eval, {{"theta", &theta}}, {doubled}, 1e-5);
  CHECK(report.max_rel_error >= 0.4);
  CHECK(report.max_rel_error == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("finite-difference harness: step bounds enforced") {
  Mat<double> theta = Mat<double>::Ones(1, 1);
  auto eval = [&]() { return theta(0, 0); };
  CHECK_THROWS_AS(finite_difference_check(eval, {{"t", &theta}}, {Mat<double>::Ones(1, 1)}, 1e-8),
                  NumericError);
  CHECK_THROWS_AS(finite_difference_check(eval, {{"t", &theta}}, {Mat<double>::Ones(1, 1)}, 1e-3),
                  NumericError);
}

TEST_CASE("gradient accumulation across fan-out") {
  Rng rng(17);
  Mat<double> x = random_mat(rng, 2, 2);
  Mat<double> w1 = random_mat(rng, 2, 2);
  Mat<double> w2 = random_mat(rng, 2, 2);

  Tape<double> t;
  auto xv = t.leaf(x);
  auto loss = add(sum_all(matmul(xv, t.constant(w1))), sum_all(matmul(xv, t.constant(w2))));
  t.backward(loss);
  Mat<double> shared_grad = t.grad(xv.id);

  Tape<double> t2;
  auto x1 = t2.leaf(x);
  auto x2 = t2.leaf(x);
  auto loss2 = add(sum_all(matmul(x1, t2.constant(w1))), sum_all(matmul(x2, t2.constant(w2))));
  t2.backward(loss2);
  Mat<double> split_sum = t2.grad(x1.id) + t2.grad(x2.id);

  CHECK((shared_grad - split_sum).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("every primitive passes finite-difference checking on random inputs") {
  struct Case {
    const char* name;
    std::function<std::vector<Mat<double>>(Rng&)> make;
    Builder build;
  };

  std::vector<Case> cases;
  // Each case builds a scalar objective exercising exactly one primitive in
  // the interior of its domain.
  auto add_case = [&](const char* name, std::function<std::vector<Mat<double>>(Rng&)> make,
                      Builder build) {
    cases.push_back({name, std::move(make), std::move(build)});
  };

  add_case(
      "matmul", [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 4), random_mat(r, 4, 2)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) { return sum_all(matmul(l[0], l[1])); });
  add_case(
      "matmul_nt",
      [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 4), random_mat(r, 2, 4)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) { return sum_all(matmul_nt(l[0], l[1])); });
  add_case(
      "add", [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 3), random_mat(r, 3, 3)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) { return sum_all(mul(add(l[0], l[1]), l[0])); });
  add_case(
      "add_n",
      [](Rng& r) {
        return std::vector<Mat<double>>{random_mat(r, 2, 2), random_mat(r, 2, 2), random_mat(r, 2, 2)};
      },
      [](Tape<double>& t, std::vector<Var<double>>& l) {
        return sum_all(mul(add_n(std::vector<Var<double>>{l[0], l[1], l[2]}), l[0]));
      });
  add_case(
      "sub", [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 3), random_mat(r, 3, 3)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) { return sum_all(mul(sub(l[0], l[1]), l[1])); });
  add_case(
      "mul_scale", [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 3)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) { return sum_all(scale(mul(l[0], l[0]), 0.7)); });
  add_case(
      "add_rowvec",
      [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 4), random_mat(r, 1, 4)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) {
        return sum_all(mul(add_rowvec(l[0], l[1]), l[0]));
      });
  add_case(
      "add_scalar",
      [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 3), random_mat(r, 1, 1)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) {
        return sum_all(mul(add_scalar(l[0], l[1]), l[0]));
      });
  add_case(
      "scale_rows",
      [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 4), random_mat(r, 3, 1)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) {
        return sum_all(mul(scale_rows(l[0], l[1]), l[0]));
      });
  add_case(
      "gelu", [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 3)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) { return sum_all(gelu(l[0])); });
  add_case(
      "sigmoid", [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 3)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) { return sum_all(sigmoid(l[0])); });
  add_case(
      "tanh", [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 3)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) { return sum_all(tanh_op(l[0])); });
  add_case(
      "log", [](Rng& r) { return std::vector<Mat<double>>{(random_mat(r, 3, 3).array().abs() + 0.5).matrix()}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) { return sum_all(log_op(l[0])); });
  add_case(
      "sqrt", [](Rng& r) { return std::vector<Mat<double>>{(random_mat(r, 3, 3).array().abs() + 0.5).matrix()}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) { return sum_all(sqrt_op(l[0])); });
  add_case(
      "softmax", [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 5)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) { return sum_all(mul(softmax_rows(l[0]), l[0])); });
  add_case(
      "layer_norm",
      [](Rng& r) {
        return std::vector<Mat<double>>{random_mat(r, 3, 5), random_mat(r, 1, 5), random_mat(r, 1, 5)};
      },
      [](Tape<double>& t, std::vector<Var<double>>& l) {
        return sum_all(mul(layer_norm_rows(l[0], l[1], l[2], 1e-5), l[0]));
      });
  add_case(
      "select_rows", [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 5, 3)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) {
        return sum_all(mul(select_rows(l[0], {1, 3, 1, 0}), select_rows(l[0], {0, 0, 2, 4})));
      });
  add_case(
      "gather_cols_sum", [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 6)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) {
        auto s = gather_cols_sum(l[0], {0, 2, 2, 5});
        return sum_all(mul(s, s));
      });
  add_case(
      "slice_concat", [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 3, 6)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) {
        auto a = slice_cols(l[0], 0, 2);
        auto b = slice_cols(l[0], 2, 4);
        return sum_all(mul(concat_cols(std::vector<Var<double>>{b, a}), l[0]));
      });
  add_case(
      "mean_masked",
      [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 1, 6)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) {
        Mat<double> mask(1, 6);
        mask << 1, 0, 1, 1, 0, 1;
        return add(mean_all(mul(l[0], l[0])), masked_mean(l[0], mask));
      });
  add_case(
      "cross_entropy", [](Rng& r) { return std::vector<Mat<double>>{random_mat(r, 4, 6)}; },
      [](Tape<double>& t, std::vector<Var<double>>& l) {
        return mean_all(cross_entropy_rows(l[0], {1, 0, 5, 3}));
      });

  for (auto& c : cases) {
    for (unsigned seed = 1; seed <= 5; ++seed) {
      Rng rng(seed * 1000 + 7);
      std::vector<Mat<double>> params = c.make(rng);
      const double err = fd_error(params, c.build, 1e-5);
      INFO("primitive " << c.name << " seed " << seed);
      CHECK(err < 1e-4);
    }
  }
}
