#include <gtest/gtest.h>

#include "heal/error.hpp"
#include "heal/layer.hpp"
#include "heal/rng.hpp"
#include "support/instances.hpp"

using namespace heal;

namespace {

struct Instance {
  Hypergraph h;
  Partition p;
  LayerGraph g;
};

Instance make(std::uint64_t seed, std::size_t n = 10) {
  CounterRng rng(61, seed);
  Instance s;
  s.h = fixtures::random_hypergraph(rng, n);
  s.p = fixtures::random_partition(rng, s.h);
  s.g = build_layer_graph(s.h, s.p, 0.8, 1.2);
  return s;
}

}  // namespace

TEST(Layer, ExteriorCountsAsInner) {
  const Instance s = make(1);
  for (std::size_t v : s.p.exterior_nodes) EXPECT_EQ(s.g.node_inner[v], 1.0);
  for (std::size_t v : s.p.boundary_nodes) EXPECT_EQ(s.g.node_inner[v], 0.0);
}

TEST(Layer, SparseUpdatesMatchDenseReference) {
  const Instance s = make(2);
  CounterRng rng(62);
  const std::size_t nv = s.h.num_nodes(), ne = s.h.num_edges();
  std::vector<double> av(nv, 1.5), bv(nv, 0.7), ae(ne, 0.9), be(ne, 1.1);
  const FeatureMatrix xv = fixtures::random_matrix(rng, nv, 2), xe = fixtures::random_matrix(rng, ne, 2);
  const FeatureMatrix gv = fixtures::random_matrix(rng, nv, 2), ge = fixtures::random_matrix(rng, ne, 2);
  EXPECT_LT(max_abs_diff(nodewise_update(s.g, xv, xe, av, bv, gv),
                         nodewise_update(s.h, s.p, xv, xe, av, bv, gv, s.g.mu)),
            1e-13);
  EXPECT_LT(max_abs_diff(edgewise_update(s.g, xv, xe, ae, be, ge),
                         edgewise_update(s.h, s.p, xv, xe, ae, be, ge, s.g.lambda)),
            1e-13);
}

TEST(Layer, AlphaBelowFloorRejected) {
  const Instance s = make(3);
  const std::size_t nv = s.h.num_nodes(), ne = s.h.num_edges();
  std::vector<double> av(nv, 0.0), bv(nv, 1.0);
  EXPECT_THROW(nodewise_update(s.g, FeatureMatrix(nv, 1), FeatureMatrix(ne, 1), av, bv, FeatureMatrix(nv, 1)),
               HealError);
}

TEST(Layer, StackRoundTrip) {
  const Instance s = make(4);
  const std::size_t nv = s.h.num_nodes(), ne = s.h.num_edges();
  const BlockSystem sys = assemble_block_system(s.h, s.p, std::vector<double>(nv, 1.0), std::vector<double>(nv, 1.0),
                                                std::vector<double>(ne, 1.0), std::vector<double>(ne, 1.0), 1.0, 1.0);
  CounterRng rng(63);
  const FeatureMatrix xv = fixtures::random_matrix(rng, nv, 3), xe = fixtures::random_matrix(rng, ne, 3);
  const auto [v, e] = unstack_state(sys, stack_state(sys, xv, xe));
  EXPECT_EQ(max_abs_diff(v, xv), 0.0);
  EXPECT_EQ(max_abs_diff(e, xe), 0.0);
  EXPECT_EQ(sys.matrix.rows(), nv + ne);
}

TEST(Layer, JacobiApplyUsesSplit) {
  const Instance s = make(5);
  const std::size_t nv = s.h.num_nodes(), ne = s.h.num_edges();
  const BlockSystem sys = assemble_block_system(s.h, s.p, std::vector<double>(nv, 2.0), std::vector<double>(nv, 0.5),
                                                std::vector<double>(ne, 1.0), std::vector<double>(ne, 0.3), 1.0, 1.0);
  const JacobiSplit js = jacobi_split(sys);
  CounterRng rng(65);
  const FeatureMatrix x = fixtures::random_matrix(rng, nv + ne, 2), g = fixtures::random_matrix(rng, nv + ne, 2);
  FeatureMatrix expected = (js.upper + js.lower) * x + g;
  for (std::size_t i = 0; i < nv + ne; ++i)
    for (double& e : expected.row(i)) e /= js.diagonal[i];
  EXPECT_LT(max_abs_diff(jacobi_apply(sys, x, g), expected), 1e-13);
}

TEST(Layer, AblationNames) {
  EXPECT_TRUE(parse_ablation("gamma").gamma);
  EXPECT_TRUE(parse_ablation("beta").beta);
  EXPECT_TRUE(parse_ablation("mu").coupling);
  const Ablation all = parse_ablation("all");
  EXPECT_TRUE(all.gamma && all.beta && all.coupling);
  EXPECT_FALSE(parse_ablation("none").any());
  EXPECT_THROW(parse_ablation("delta"), HealError);
}

TEST(Layer, ForwardShapesAndGradients) {
  const Instance s = make(6, 8);
  CounterRng rng(64);
  const std::string prefix = layer_prefix(0);
  const auto shapes = layer_parameter_shapes(prefix, 4);
  ad::Tape tape;
  VarMap w;
  for (const auto& [name, shape] : shapes)
    w.emplace(name, tape.leaf(fixtures::random_matrix(rng, shape.first, shape.second)));
  ad::Var xv = tape.constant(fixtures::random_matrix(rng, s.h.num_nodes(), 4));
  ad::Var xe = tape.constant(fixtures::random_matrix(rng, s.h.num_edges(), 4));
  const auto [ov, oe] = layer_forward(s.g, xv, xe, w, prefix, LayerOptions{});
  EXPECT_EQ(ov.rows(), s.h.num_nodes());
  EXPECT_EQ(oe.rows(), s.h.num_edges());
  EXPECT_EQ(ov.cols(), 4u);
  tape.backward(ad::add(ad::sum(ov), ad::sum(oe)));
  EXPECT_TRUE(w.at(prefix + "phi.node.w").grad().all_finite());
}
