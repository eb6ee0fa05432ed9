#include <gtest/gtest.h>

#include <set>

#include "heal/error.hpp"
#include "heal/synth.hpp"
#include "json.hpp"

using namespace heal;

TEST(Synth, TransferTopologiesReachTarget) {
  for (const char* topo : {"hes", "hep", "her", "hed"}) {
    const std::size_t m = std::string(topo) == "hed" ? 2 : 3;
    const TransferInstance t = gen_transfer(topo, 4, m, 1);
    EXPECT_TRUE(t.hypergraph.is_connected()) << topo;
    EXPECT_EQ(hop_distance(t.hypergraph, t.source, t.target), t.required_depth) << topo;
    EXPECT_EQ(t.features.rows(), t.hypergraph.num_nodes());
    EXPECT_EQ(t.features.cols(), kTransferFeatureDim);
  }
  EXPECT_THROW(gen_transfer("hex", 4, 1, 0), HealError);
}

TEST(Synth, TransferIsSeeded) {
  const TransferInstance a = gen_her(3, 4, 9), b = gen_her(3, 4, 9), c = gen_her(3, 4, 10);
  EXPECT_EQ(a.hypergraph.edge_lists(), b.hypergraph.edge_lists());
  EXPECT_EQ(max_abs_diff(a.features, b.features), 0.0);
  EXPECT_GT(max_abs_diff(a.features, c.features), 0.0);
}

TEST(Synth, CsbmLevelsShiftHomophily) {
  CsbmParams p;
  p.n_nodes = 200;
  p.n_edges = 40;
  p.edge_size = 6;
  p.level = 1;
  const CsbmInstance homo = gen_csbm(p);
  p.level = 7;
  const CsbmInstance hetero = gen_csbm(p);
  EXPECT_GT(clique_homophily(homo.hypergraph, homo.labels), clique_homophily(hetero.hypergraph, hetero.labels));
  EXPECT_EQ(homo.train.size() + homo.val.size() + homo.test.size(), 200u);
  EXPECT_THROW(csbm_class0_proportion(0), HealError);
  EXPECT_THROW(csbm_class0_proportion(8), HealError);
}

TEST(Synth, RegularInstanceIsDegreeRegular) {
  RegularParams p;
  const CsbmInstance c = gen_regular_homophilic(p);
  EXPECT_TRUE(c.hypergraph.is_connected());
  for (std::size_t d : c.hypergraph.node_degrees()) EXPECT_EQ(d, p.node_degree);
  EXPECT_EQ(c.hypergraph.uniform_rank(), p.edge_size);
  EXPECT_GT(edge_majority_fraction(c.hypergraph, c.labels), 0.9);
  p.n_nodes = 50;
  EXPECT_THROW(gen_regular_homophilic(p), HealError);
}

TEST(Synth, UniformAndTube) {
  const Hypergraph h = gen_random_uniform(10, 6, 3, 4);
  EXPECT_EQ(h.uniform_rank(), 3u);
  EXPECT_TRUE(h.is_connected());
  EXPECT_THROW(gen_random_uniform(10, 2, 3, 4), HealError);

  const TubeInstance t = gen_tube(5, 2);
  EXPECT_EQ(t.subset.size(), 5u);
  EXPECT_EQ(t.hypergraph.num_nodes(), 9u);
  EXPECT_EQ(t.hypergraph.uniform_rank(), 2u);
}

TEST(Synth, SidecarsAreJson) {
  const auto t = nlohmann::json::parse(transfer_sidecar_json(gen_hes(4, 0)));
  EXPECT_TRUE(t.contains("source"));
  EXPECT_TRUE(t.contains("target"));
  CsbmParams p;
  p.n_nodes = 60;
  p.n_edges = 12;
  p.edge_size = 5;
  const auto c = nlohmann::json::parse(csbm_sidecar_json(gen_csbm(p)));
  EXPECT_EQ(c["labels"].size(), 60u);
}
