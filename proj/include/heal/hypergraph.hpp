#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heal/dense.hpp"

namespace heal {

class Hypergraph {
 public:
  Hypergraph() = default;

  std::size_t num_nodes() const { return node_degrees_.size(); }
  std::size_t num_edges() const { return edge_offsets_.empty() ? 0 : edge_offsets_.size() - 1; }

  std::span<const std::size_t> edge_members(std::size_t e) const {
    return {edge_nodes_.data() + edge_offsets_[e], edge_offsets_[e + 1] - edge_offsets_[e]};
  }
  std::span<const std::size_t> node_memberships(std::size_t v) const {
    return {node_edges_.data() + node_offsets_[v], node_offsets_[v + 1] - node_offsets_[v]};
  }

  std::size_t node_degree(std::size_t v) const { return node_degrees_[v]; }
  std::size_t edge_degree(std::size_t e) const { return edge_offsets_[e + 1] - edge_offsets_[e]; }
  const std::vector<std::size_t>& node_degrees() const { return node_degrees_; }
  std::vector<std::size_t> edge_degrees() const;

  std::vector<std::vector<std::size_t>> edge_lists() const;

  // Returns r when every hyperedge has r members, 0 otherwise.
  std::size_t uniform_rank() const;
  bool is_connected() const;

  friend Hypergraph build_hypergraph(std::vector<std::vector<std::size_t>> edge_lists, std::size_t num_nodes);

 private:
  std::vector<std::size_t> edge_offsets_;
  std::vector<std::size_t> edge_nodes_;
  std::vector<std::size_t> node_offsets_;
  std::vector<std::size_t> node_edges_;
  std::vector<std::size_t> node_degrees_;
};

// Members of each list are sorted on construction.
Hypergraph build_hypergraph(std::vector<std::vector<std::size_t>> edge_lists, std::size_t num_nodes);

// Disjoint union; node and edge indices of copy k are offset by k times the sizes.
Hypergraph disjoint_union(const Hypergraph& h, std::size_t copies);

Hypergraph parse_hypergraph(const std::string& text);
std::string format_hypergraph(const Hypergraph& h);
Hypergraph load_hypergraph(const std::string& path);
void save_hypergraph(const Hypergraph& h, const std::string& path);

struct WeightedEntry {
  std::size_t index;
  double weight;
};

// Row i lists (j, S_ij) with S_ij = sum over edges containing i and j of 1/d_e, j ascending, j = i included.
std::vector<std::vector<WeightedEntry>> node_pair_weights(const Hypergraph& h);
// Row e lists (f, S_ef) with S_ef = sum over nodes in both e and f of 1/d_v.
std::vector<std::vector<WeightedEntry>> edge_pair_weights(const Hypergraph& h);

DenseMatrix node_laplacian(const Hypergraph& h);
DenseMatrix edge_laplacian(const Hypergraph& h);

struct PropagationOperators {
  DenseMatrix node_to_edge;  // |E| x |V|
  DenseMatrix edge_to_node;  // |V| x |E|
};

PropagationOperators propagation_operators(const Hypergraph& h);

struct Partition {
  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  std::vector<std::size_t> subset;
  std::vector<std::size_t> interior_nodes;
  std::vector<std::size_t> boundary_nodes;
  std::vector<std::size_t> exterior_nodes;
  std::vector<std::size_t> interior_edges;
  std::vector<std::size_t> boundary_edges;
  std::vector<std::size_t> exterior_edges;
  std::vector<std::uint8_t> node_indicator;
  std::vector<std::uint8_t> edge_indicator;
  std::vector<std::uint8_t> subset_indicator;

  // Interior nodes followed by boundary nodes.
  std::vector<std::size_t> subset_order() const;
  bool in_subset(std::size_t v) const { return subset_indicator[v] != 0; }
  bool is_boundary_node(std::size_t v) const { return in_subset(v) && !node_indicator[v]; }
};

Partition derive_partition(const Hypergraph& h, std::span<const std::size_t> subset);

// Copy k of the partition lives on copy k of disjoint_union(h, copies).
Partition replicate_partition(const Hypergraph& h, const Partition& p, std::size_t copies);

struct LaplacianBlocks {
  DenseMatrix interior;              // L^{S->S}: interior rows, interior cols
  DenseMatrix boundary_to_interior;  // L^{dS->S}: interior rows, boundary cols
  DenseMatrix interior_to_boundary;  // L^{S->dS}: boundary rows, interior cols
  DenseMatrix boundary;              // L^{dS->dS}
};

LaplacianBlocks restrict_laplacian(const DenseMatrix& L, const Partition& p);

}  // namespace heal
