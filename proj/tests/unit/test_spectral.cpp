#include <gtest/gtest.h>

#include "heal/error.hpp"
#include "heal/rng.hpp"
#include "heal/spectral.hpp"
#include "heal/synth.hpp"
#include "support/instances.hpp"

using namespace heal;

TEST(Spectral, JacobiReconstructsMatrix) {
  CounterRng rng(31);
  DenseMatrix a = fixtures::random_matrix(rng, 9, 9);
  a = a + a.transpose();
  const auto d = eig_sym(a);
  EXPECT_TRUE(std::is_sorted(d.eigenvalues.begin(), d.eigenvalues.end()));
  DenseMatrix lambda(9, 9);
  for (std::size_t i = 0; i < 9; ++i) lambda(i, i) = d.eigenvalues[i];
  EXPECT_LT(max_abs_diff(d.eigenvectors * lambda * d.eigenvectors.transpose(), a), 1e-11);
  EXPECT_LT(max_abs_diff(matmul_tn(d.eigenvectors, d.eigenvectors), DenseMatrix::identity(9)), 1e-12);
}

TEST(Spectral, RejectsNonSymmetric) {
  EXPECT_THROW(eig_sym(DenseMatrix{{1, 2}, {0, 1}}), HealError);
}

TEST(Spectral, KnownSpectrumOfSmallHypergraph) {
  const Hypergraph h = build_hypergraph({{0, 1}, {1, 2}, {0, 2, 3}}, 4);
  const GapReport g = gap_report(eig_sym(node_laplacian(h)));
  EXPECT_EQ(g.zero_multiplicity, 1u);
  EXPECT_FALSE(g.disconnected());
  EXPECT_GT(g.value, 0.0);
}

TEST(Spectral, DisconnectedHasRepeatedZero) {
  const Hypergraph h = disjoint_union(build_hypergraph({{0, 1, 2}}, 3), 2);
  EXPECT_EQ(gap_report(eig_sym(node_laplacian(h))).zero_multiplicity, 2u);
}

TEST(Spectral, CheegerOfCompleteEdge) {
  // Cut counts split member pairs: a 2|2 split of one 4-edge cuts 4 pairs over volume 2.
  const Hypergraph h = build_hypergraph({{0, 1, 2, 3}}, 4);
  const CheegerResult c = cheeger_exact(h);
  EXPECT_NEAR(c.phi, 2.0, 1e-15);
  EXPECT_EQ(c.argmin_subset.size(), 2u);
  EXPECT_EQ(c.subsets_examined, 14u);
}

TEST(Spectral, SweepNeverBeatsExact) {
  CounterRng rng(32);
  for (int k = 0; k < 10; ++k) {
    const Hypergraph h = fixtures::random_hypergraph(rng, 6 + rng.below(8));
    const auto d = eig_sym(node_laplacian(h));
    const std::vector<double> f = d.eigenvectors.col(gap_report(d).index);
    EXPECT_GE(cheeger_sweep(h, f).phi + 1e-12, cheeger_exact(h).phi);
  }
}

TEST(Spectral, ExactRefusesLargeInputs) {
  EXPECT_THROW(cheeger_exact(gen_random_uniform(30, 20, 3, 1)), HealError);
}

TEST(Spectral, FiedlerVectorMatchesDense) {
  const Hypergraph h = gen_random_uniform(14, 10, 3, 7);
  const auto d = eig_sym(node_laplacian(h));
  const std::vector<double> dense = d.eigenvectors.col(gap_report(d).index);
  const std::vector<double> power = fiedler_vector(h);
  double dot = 0.0;
  for (std::size_t i = 0; i < dense.size(); ++i) dot += dense[i] * power[i];
  EXPECT_NEAR(std::abs(dot), 1.0, 1e-6);
}

TEST(Spectral, DirichletEnergyOfConstantDegreeScaling) {
  const Hypergraph h = gen_random_uniform(10, 8, 3, 3);
  FeatureMatrix x(10, 1);
  for (std::size_t v = 0; v < 10; ++v) x(v, 0) = std::sqrt(static_cast<double>(h.node_degree(v)));
  EXPECT_NEAR(dirichlet_energy(h, x), 0.0, 1e-12);
}
