#include <gtest/gtest.h>

#include <cmath>

#include "heal/error.hpp"
#include "heal/heatflow.hpp"
#include "heal/rng.hpp"
#include "heal/synth.hpp"
#include "support/instances.hpp"

using namespace heal;

TEST(Heatflow, KernelAtZeroIsIdentityAndSemigroup) {
  CounterRng rng(41);
  const Hypergraph h = fixtures::random_hypergraph(rng, 10);
  const DenseMatrix L = node_laplacian(h);
  const FeatureMatrix z = fixtures::random_matrix(rng, 10, 2);
  EXPECT_LT(max_abs_diff(heat_kernel_apply(L, 0.0, z), z), 1e-12);
  const FeatureMatrix twice = heat_kernel_apply(L, 0.3, heat_kernel_apply(L, 0.4, z));
  EXPECT_LT(max_abs_diff(twice, heat_kernel_apply(L, 0.7, z)), 1e-12);
}

TEST(Heatflow, UnstableStepIsNumericalError) {
  const Hypergraph h = build_hypergraph({{0, 1}, {1, 2}}, 3);
  const DenseMatrix L = node_laplacian(h);
  const FeatureMatrix z(3, 1, 1.0);
  try {
    diffuse_with_source(L, z, nullptr, 100.0, 3);
    FAIL() << "expected a numerical error";
  } catch (const HealError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Numerical);
  }
}

TEST(Heatflow, SourceFreeEnergyIsNonIncreasing) {
  CounterRng rng(42);
  const Hypergraph h = fixtures::random_hypergraph(rng, 12);
  const DenseMatrix L = node_laplacian(h);
  const DiffusionTrace tr = diffuse_with_source(L, fixtures::random_matrix(rng, 12, 2), nullptr, 0.1, 40);
  for (std::size_t i = 1; i < tr.energies.size(); ++i) EXPECT_LE(tr.energies[i], tr.energies[i - 1] + 1e-12);
}

TEST(Heatflow, BoundarySpecValidation) {
  EXPECT_NO_THROW(BoundarySpec::dirichlet(3).validate(3));
  EXPECT_THROW(BoundarySpec::dirichlet(3).validate(2), HealError);
  EXPECT_THROW(BoundarySpec::robin({1.0, -1.0}, {1.0, 1.0}).validate(2), HealError);
  EXPECT_EQ(parse_boundary_kind("robin"), BoundaryKind::Robin);
  EXPECT_EQ(to_string(BoundaryKind::Neumann), "neumann");
  EXPECT_THROW(parse_boundary_kind("periodic"), HealError);
}

TEST(Heatflow, DirichletHoldsBoundaryValues) {
  const TubeInstance t = gen_tube(6, 2);
  const Partition p = derive_partition(t.hypergraph, t.subset);
  DenseMatrix gamma(p.boundary_nodes.size(), 1, 0.25);
  const BoundarySpec spec = BoundarySpec::dirichlet(p.boundary_nodes.size(), gamma);
  const FeatureMatrix z(p.subset.size(), 1, 1.0);
  const DiffusionTrace tr = boundary_conditioned_diffuse(t.hypergraph, p, spec, z, 0.05, 30);
  const std::size_t ni = p.interior_nodes.size();
  for (std::size_t b = 0; b < p.boundary_nodes.size(); ++b) EXPECT_NEAR(tr.states.back()(ni + b, 0), 0.25, 1e-12);
}

TEST(Heatflow, RobinGapInterpolates) {
  const TubeInstance t = gen_tube(8, 2);
  const Partition p = derive_partition(t.hypergraph, t.subset);
  const std::size_t nb = p.boundary_nodes.size();
  const double d = boundary_gap(t.hypergraph, p, BoundarySpec::dirichlet(nb)).gap;
  const double n = boundary_gap(t.hypergraph, p, BoundarySpec::neumann(nb)).gap;
  const double r = boundary_gap(t.hypergraph, p, BoundarySpec::robin({1.0, 1.0}, {1.0, 1.0})).gap;
  EXPECT_GE(d, r);
  EXPECT_GE(r, n);
}

TEST(Heatflow, NeumannVariantsDifferOnlyWhenEdgesLeave) {
  const TubeInstance t = gen_tube(5, 2);
  const Partition p = derive_partition(t.hypergraph, t.subset);
  const DenseMatrix a = subset_laplacian(t.hypergraph, p, NeumannVariant::Restrict);
  const DenseMatrix b = subset_laplacian(t.hypergraph, p, NeumannVariant::Delete);
  EXPECT_EQ(a.rows(), p.subset.size());
  EXPECT_TRUE(a.is_symmetric(1e-14));
  EXPECT_TRUE(b.is_symmetric(1e-14));
}

TEST(Heatflow, ModeStepClosedForm) {
  // Zero start, unit rate and source over unit time.
  EXPECT_NEAR(duhamel_mode_step(1.0, 1.0, 0.0, 1.0), 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(mode_lower_bound(1.0, 1.0, 1.0, 0.0), 1.0 - std::exp(-1.0), 1e-15);
  // Without source the mode decays.
  EXPECT_NEAR(duhamel_mode_step(0.5, 2.0, 3.0, 0.0), 3.0 * std::exp(-1.0), 1e-14);
}

TEST(Heatflow, EnergyDecayReportOnSingleMode) {
  CounterRng rng(43);
  const Hypergraph h = fixtures::random_hypergraph(rng, 9);
  const DenseMatrix L = node_laplacian(h);
  const EnergyDecayReport r = verify_energy_decay(L, fixtures::random_matrix(rng, 9, 1), {0.0, 0.5, 1.0, 2.0});
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.energies.size(), 4u);
  EXPECT_LE(r.tightest_ratio, 1.0 + 1e-12);
}
