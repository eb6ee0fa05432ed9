#include <gtest/gtest.h>

#include <filesystem>

#include "heal/error.hpp"
#include "heal/hypergraph.hpp"
#include "heal/rng.hpp"
#include "support/instances.hpp"

using namespace heal;

namespace {

// H1: a triangle of pairs plus one triple.
Hypergraph small() { return build_hypergraph({{0, 1}, {1, 2}, {0, 2, 3}}, 4); }

}  // namespace

TEST(Hypergraph, DegreesAndIncidence) {
  const Hypergraph h = small();
  EXPECT_EQ(h.num_nodes(), 4u);
  EXPECT_EQ(h.num_edges(), 3u);
  EXPECT_EQ(h.node_degrees(), (std::vector<std::size_t>{2, 2, 2, 1}));
  EXPECT_EQ(h.edge_degrees(), (std::vector<std::size_t>{2, 2, 3}));
  EXPECT_EQ(h.uniform_rank(), 0u);
  EXPECT_TRUE(h.is_connected());
}

TEST(Hypergraph, RejectsInvalidInput) {
  EXPECT_THROW(build_hypergraph({{0, 5}}, 3), HealError);
  EXPECT_THROW(build_hypergraph({{}}, 3), HealError);
  EXPECT_THROW(build_hypergraph({{0, 1}}, 3), HealError);  // node 2 isolated
}

TEST(Hypergraph, TextRoundTrip) {
  const Hypergraph h = small();
  const Hypergraph back = parse_hypergraph(format_hypergraph(h));
  EXPECT_EQ(back.edge_lists(), h.edge_lists());
  EXPECT_THROW(parse_hypergraph("edges=3\n0 1\n"), HealError);

  const auto path = std::filesystem::temp_directory_path() / "heal_hypergraph_roundtrip.txt";
  save_hypergraph(h, path.string());
  EXPECT_EQ(load_hypergraph(path.string()).edge_lists(), h.edge_lists());
  std::filesystem::remove(path);
  EXPECT_THROW(load_hypergraph("/nonexistent/graph.txt"), HealError);
}

TEST(Hypergraph, LaplaciansAreSymmetricWithUnitDiagonalGaps) {
  CounterRng rng(21);
  for (int k = 0; k < 10; ++k) {
    const Hypergraph h = fixtures::random_hypergraph(rng, 3 + rng.below(12));
    const DenseMatrix Lv = node_laplacian(h), Le = edge_laplacian(h);
    EXPECT_TRUE(Lv.is_symmetric(1e-14));
    EXPECT_TRUE(Le.is_symmetric(1e-14));
    // sqrt(d) lies in the kernel of the node Laplacian.
    std::vector<double> s(h.num_nodes());
    for (std::size_t v = 0; v < s.size(); ++v) s[v] = std::sqrt(static_cast<double>(h.node_degree(v)));
    for (double r : Lv * std::span<const double>(s)) EXPECT_NEAR(r, 0.0, 1e-12);
  }
}

TEST(Hypergraph, PairWeightsSumToDegree) {
  const Hypergraph h = small();
  const auto rows = node_pair_weights(h);
  for (std::size_t i = 0; i < h.num_nodes(); ++i) {
    double total = 0.0;
    for (const auto& e : rows[i]) total += e.weight;
    EXPECT_NEAR(total, static_cast<double>(h.node_degree(i)), 1e-14);
  }
}

TEST(Hypergraph, PartitionClassifiesNodesAndEdges) {
  const Hypergraph h = small();
  const std::vector<std::size_t> subset{0, 1, 2};
  const Partition p = derive_partition(h, subset);
  EXPECT_EQ(p.interior_nodes, (std::vector<std::size_t>{1}));
  EXPECT_EQ(p.boundary_nodes, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(p.exterior_nodes, (std::vector<std::size_t>{3}));
  EXPECT_EQ(p.subset_order(), (std::vector<std::size_t>{1, 0, 2}));
  EXPECT_TRUE(p.is_boundary_node(0));
  EXPECT_FALSE(p.is_boundary_node(1));
  EXPECT_FALSE(p.is_boundary_node(3));
}

TEST(Hypergraph, DisjointUnionReplicatesPartition) {
  const Hypergraph h = small();
  const std::vector<std::size_t> subset{0, 1, 2};
  const Partition p = derive_partition(h, subset);
  const Hypergraph u = disjoint_union(h, 3);
  EXPECT_EQ(u.num_nodes(), 12u);
  EXPECT_EQ(u.num_edges(), 9u);
  EXPECT_FALSE(u.is_connected());
  const Partition q = replicate_partition(h, p, 3);
  EXPECT_EQ(q.boundary_nodes, (std::vector<std::size_t>{0, 2, 4, 6, 8, 10}));
  EXPECT_EQ(q.interior_nodes, (std::vector<std::size_t>{1, 5, 9}));
}

TEST(Hypergraph, LaplacianBlocksReassemble) {
  CounterRng rng(22);
  const Hypergraph h = fixtures::random_hypergraph(rng, 12);
  const Partition p = fixtures::random_partition(rng, h);
  const DenseMatrix L = node_laplacian(h);
  const LaplacianBlocks b = restrict_laplacian(L, p);
  EXPECT_LT(max_abs_diff(b.interior, L.submatrix(p.interior_nodes, p.interior_nodes)), 1e-15);
  EXPECT_LT(max_abs_diff(b.interior_to_boundary, L.submatrix(p.boundary_nodes, p.interior_nodes)), 1e-15);
}
