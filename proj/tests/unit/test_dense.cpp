#include <gtest/gtest.h>

#include "heal/dense.hpp"
#include "heal/error.hpp"
#include "heal/rng.hpp"
#include "support/instances.hpp"

using namespace heal;

TEST(Dense, ProductMatchesNaiveLoop) {
  CounterRng rng(11);
  const DenseMatrix a = fixtures::random_matrix(rng, 5, 7), b = fixtures::random_matrix(rng, 7, 3);
  const DenseMatrix c = a * b;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 7; ++k) s += a(i, k) * b(k, j);
      EXPECT_NEAR(c(i, j), s, 1e-13);
    }
}

TEST(Dense, TransposedProductsAgreeWithExplicitTranspose) {
  CounterRng rng(12);
  const DenseMatrix a = fixtures::random_matrix(rng, 6, 4), b = fixtures::random_matrix(rng, 6, 3);
  EXPECT_LT(max_abs_diff(matmul_tn(a, b), a.transpose() * b), 1e-13);
  const DenseMatrix c = fixtures::random_matrix(rng, 5, 4);
  EXPECT_LT(max_abs_diff(matmul_nt(a, c), a * c.transpose()), 1e-13);
}

TEST(Dense, ShapeMismatchThrows) {
  EXPECT_THROW(DenseMatrix(2, 3) * DenseMatrix(2, 3), HealError);
  EXPECT_THROW(DenseMatrix(2, 3) + DenseMatrix(3, 2), HealError);
}

TEST(Dense, SolveRecoversKnownSolution) {
  CounterRng rng(13);
  DenseMatrix a = fixtures::random_matrix(rng, 6, 6);
  for (std::size_t i = 0; i < 6; ++i) a(i, i) += 6.0;
  const DenseMatrix x = fixtures::random_matrix(rng, 6, 2);
  EXPECT_LT(max_abs_diff(solve(a, a * x), x), 1e-12);
}

TEST(Dense, SolveRejectsSingular) {
  const DenseMatrix a{{1, 2}, {2, 4}};
  EXPECT_THROW(solve(a, DenseMatrix(2, 1, 1.0)), HealError);
}

TEST(Dense, TraceQuadratic) {
  const DenseMatrix L{{2, -1}, {-1, 2}};
  const DenseMatrix x{{1, 0}, {2, 1}};
  // column 0: [1 2] L [1 2]^T = 6, column 1: [0 1] L [0 1]^T = 2
  EXPECT_DOUBLE_EQ(trace_quadratic(L, x), 8.0);
}

TEST(Dense, SelectAndSubmatrix) {
  const DenseMatrix m{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
  const std::vector<std::size_t> rows{2, 0}, cols{1};
  const DenseMatrix s = m.submatrix(rows, cols);
  EXPECT_EQ(s.rows(), 2u);
  EXPECT_EQ(s(0, 0), 8);
  EXPECT_EQ(s(1, 0), 2);
  EXPECT_EQ(m.select_rows(rows)(0, 2), 9);
}

TEST(Dense, SymmetryAndFiniteness) {
  DenseMatrix m{{1, 2}, {2, 1}};
  EXPECT_TRUE(m.is_symmetric(0));
  m(0, 1) = 2.5;
  EXPECT_FALSE(m.is_symmetric(1e-3));
  m(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(m.all_finite());
}
