#include <gtest/gtest.h>

#include <cmath>

#include "heal/autodiff.hpp"
#include "heal/error.hpp"
#include "heal/rng.hpp"
#include "support/instances.hpp"

using namespace heal;
using namespace heal::ad;

namespace {

double worst(const std::vector<double>& errs) { return *std::max_element(errs.begin(), errs.end()); }

}  // namespace

TEST(Autodiff, ElementwiseOpsMatchDifferences) {
  CounterRng rng(51);
  const std::vector<DenseMatrix> leaves{fixtures::random_matrix(rng, 4, 3), fixtures::random_matrix(rng, 3, 2),
                                        fixtures::random_matrix(rng, 4, 1)};
  auto f = [](Tape& t, const std::vector<Var>& v) {
    Var h = gelu(matmul(v[0], v[1]));
    h = mul(add(h, v[2]), reciprocal(offset(softplus(h), 0.5)));
    return sum(scale(h, 0.7));
  };
  EXPECT_LT(worst(grad_check(f, leaves)), 1e-7);
}

TEST(Autodiff, LayerNormAndCrossEntropy) {
  CounterRng rng(52);
  const std::vector<DenseMatrix> leaves{fixtures::random_matrix(rng, 5, 4), fixtures::random_matrix(rng, 1, 4),
                                        fixtures::random_matrix(rng, 1, 4)};
  const std::vector<int> labels{0, 3, 1, 2, 0};
  const std::vector<std::size_t> rows{0, 2, 4};
  auto f = [&](Tape&, const std::vector<Var>& v) {
    return softmax_cross_entropy(row_layernorm(v[0], v[1], v[2]), labels, rows);
  };
  EXPECT_LT(worst(grad_check(f, leaves)), 1e-7);
}

TEST(Autodiff, GatherSumIsLinear) {
  GatherPlan plan;
  plan.input_rows = 3;
  plan.add(0, 2.0);
  plan.add(2, -1.0);
  plan.end_row();
  plan.add(1, 0.5);
  plan.end_row();
  const DenseMatrix x{{1, 2}, {3, 4}, {5, 6}};
  const DenseMatrix y = plan.apply(x);
  EXPECT_EQ(y(0, 0), -3);
  EXPECT_EQ(y(1, 1), 2);
  CounterRng rng(53);
  auto f = [&](Tape&, const std::vector<Var>& v) { return sum(mul(gather_sum(v[0], plan), gather_sum(v[0], plan))); };
  EXPECT_LT(worst(grad_check(f, {fixtures::random_matrix(rng, 3, 2)})), 1e-8);
}

TEST(Autodiff, SharedSubexpressionAccumulates) {
  Tape t;
  Var x = t.leaf(DenseMatrix{{3.0}});
  Var y = mul(x, x);
  Var z = add(y, x);
  t.backward(z);
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 7.0);
}

TEST(Autodiff, BackwardNeedsScalar) {
  Tape t;
  Var x = t.leaf(DenseMatrix(2, 2, 1.0));
  EXPECT_THROW(t.backward(x), HealError);
}

TEST(Autodiff, DropoutIsIdentityOutsideTraining) {
  Tape t;
  const DenseMatrix x(4, 4, 1.0);
  Var v = t.constant(x);
  EXPECT_EQ(max_abs_diff(dropout(v, 0.5, 9, false).value(), x), 0.0);
  const DenseMatrix a = dropout(v, 0.5, 9, true).value();
  const DenseMatrix b = dropout(v, 0.5, 9, true).value();
  EXPECT_EQ(max_abs_diff(a, b), 0.0);
  for (double e : a.values()) EXPECT_TRUE(e == 0.0 || e == 2.0);
}

TEST(Autodiff, AdamMinimisesQuadratic) {
  ParameterSet params{{"w", DenseMatrix{{5.0, -3.0}}}};
  Adam opt(0.1);
  for (int i = 0; i < 500; ++i) {
    ParameterSet grads{{"w", 2.0 * params["w"]}};
    opt.step(params, grads);
  }
  EXPECT_LT(params["w"].max_abs(), 1e-2);
  EXPECT_EQ(opt.steps(), 500u);
}

TEST(Autodiff, SgdStep) {
  ParameterSet params{{"w", DenseMatrix{{1.0}}}};
  Sgd opt(0.5);
  opt.step(params, {{"w", DenseMatrix{{2.0}}}});
  EXPECT_DOUBLE_EQ(params["w"](0, 0), 0.0);
}

TEST(Autodiff, ScalarHelpers) {
  EXPECT_NEAR(gelu_value(0.0), 0.0, 1e-15);
  EXPECT_NEAR(softplus_value(0.0), std::log(2.0), 1e-15);
  const double h = 1e-6;
  EXPECT_NEAR(gelu_derivative(0.7), (gelu_value(0.7 + h) - gelu_value(0.7 - h)) / (2 * h), 1e-8);
}
