#include "heal/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "heal/error.hpp"

namespace heal {

Hypergraph build_hypergraph(std::vector<std::vector<std::size_t>> edge_lists, std::size_t num_nodes) {
  Hypergraph h;
  h.edge_offsets_.assign(1, 0);
  h.node_degrees_.assign(num_nodes, 0);
  for (std::size_t e = 0; e < edge_lists.size(); ++e) {
    auto& members = edge_lists[e];
    if (members.empty()) fail(ErrorKind::InvalidArgument, "empty hyperedge at index " + std::to_string(e));
    std::sort(members.begin(), members.end());
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (members[k] >= num_nodes)
        fail(ErrorKind::InvalidArgument, "node index " + std::to_string(members[k]) + " in hyperedge " +
                                             std::to_string(e) + " exceeds num_nodes " + std::to_string(num_nodes));
      if (k > 0 && members[k] == members[k - 1])
        fail(ErrorKind::InvalidArgument,
             "duplicate node " + std::to_string(members[k]) + " in hyperedge " + std::to_string(e));
      ++h.node_degrees_[members[k]];
    }
    h.edge_nodes_.insert(h.edge_nodes_.end(), members.begin(), members.end());
    h.edge_offsets_.push_back(h.edge_nodes_.size());
  }
  for (std::size_t v = 0; v < num_nodes; ++v)
    if (h.node_degrees_[v] == 0) fail(ErrorKind::InvalidArgument, "isolated node " + std::to_string(v));

  h.node_offsets_.assign(num_nodes + 1, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) h.node_offsets_[v + 1] = h.node_offsets_[v] + h.node_degrees_[v];
  h.node_edges_.assign(h.edge_nodes_.size(), 0);
  std::vector<std::size_t> cursor(h.node_offsets_.begin(), h.node_offsets_.end() - 1);
  for (std::size_t e = 0; e + 1 < h.edge_offsets_.size(); ++e)
    for (std::size_t k = h.edge_offsets_[e]; k < h.edge_offsets_[e + 1]; ++k)
      h.node_edges_[cursor[h.edge_nodes_[k]]++] = e;
  return h;
}

std::vector<std::size_t> Hypergraph::edge_degrees() const {
  std::vector<std::size_t> d(num_edges());
  for (std::size_t e = 0; e < d.size(); ++e) d[e] = edge_degree(e);
  return d;
}

std::vector<std::vector<std::size_t>> Hypergraph::edge_lists() const {
  std::vector<std::vector<std::size_t>> out(num_edges());
  for (std::size_t e = 0; e < out.size(); ++e) {
    auto m = edge_members(e);
    out[e].assign(m.begin(), m.end());
  }
  return out;
}

std::size_t Hypergraph::uniform_rank() const {
  if (num_edges() == 0) return 0;
  const std::size_t r = edge_degree(0);
  for (std::size_t e = 1; e < num_edges(); ++e)
    if (edge_degree(e) != r) return 0;
  return r;
}

bool Hypergraph::is_connected() const {
  if (num_nodes() == 0) return true;
  std::vector<std::uint8_t> seen_node(num_nodes(), 0), seen_edge(num_edges(), 0);
  std::vector<std::size_t> stack{0};
  seen_node[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t e : node_memberships(v)) {
      if (seen_edge[e]) continue;
      seen_edge[e] = 1;
      for (std::size_t u : edge_members(e)) {
        if (seen_node[u]) continue;
        seen_node[u] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == num_nodes();
}

Hypergraph disjoint_union(const Hypergraph& h, std::size_t copies) {
  std::vector<std::vector<std::size_t>> edges;
  edges.reserve(h.num_edges() * copies);
  for (std::size_t k = 0; k < copies; ++k)
    for (std::size_t e = 0; e < h.num_edges(); ++e) {
      std::vector<std::size_t> m;
      for (std::size_t v : h.edge_members(e)) m.push_back(v + k * h.num_nodes());
      edges.push_back(std::move(m));
    }
  return build_hypergraph(std::move(edges), h.num_nodes() * copies);
}

std::vector<std::vector<WeightedEntry>> node_pair_weights(const Hypergraph& h) {
  std::vector<std::vector<WeightedEntry>> rows(h.num_nodes());
  std::map<std::size_t, double> acc;
  for (std::size_t i = 0; i < h.num_nodes(); ++i) {
    acc.clear();
    for (std::size_t e : h.node_memberships(i)) {
      const double w = 1.0 / static_cast<double>(h.edge_degree(e));
      for (std::size_t j : h.edge_members(e)) acc[j] += w;
    }
    rows[i].reserve(acc.size());
    for (const auto& [j, w] : acc) rows[i].push_back({j, w});
  }
  return rows;
}

std::vector<std::vector<WeightedEntry>> edge_pair_weights(const Hypergraph& h) {
  std::vector<std::vector<WeightedEntry>> rows(h.num_edges());
  std::map<std::size_t, double> acc;
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    acc.clear();
    for (std::size_t i : h.edge_members(e)) {
      const double w = 1.0 / static_cast<double>(h.node_degree(i));
      for (std::size_t f : h.node_memberships(i)) acc[f] += w;
    }
    rows[e].reserve(acc.size());
    for (const auto& [f, w] : acc) rows[e].push_back({f, w});
  }
  return rows;
}

namespace {

DenseMatrix laplacian_from_pairs(const std::vector<std::vector<WeightedEntry>>& pairs,
                                 const std::vector<std::size_t>& degree) {
  const std::size_t n = pairs.size();
  DenseMatrix L = DenseMatrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, s] : pairs[i])
      L(i, j) -= s / std::sqrt(static_cast<double>(degree[i]) * static_cast<double>(degree[j]));
  return L;
}

}  // namespace

DenseMatrix node_laplacian(const Hypergraph& h) { return laplacian_from_pairs(node_pair_weights(h), h.node_degrees()); }

DenseMatrix edge_laplacian(const Hypergraph& h) { return laplacian_from_pairs(edge_pair_weights(h), h.edge_degrees()); }

PropagationOperators propagation_operators(const Hypergraph& h) {
  PropagationOperators ops{DenseMatrix(h.num_edges(), h.num_nodes()), DenseMatrix(h.num_nodes(), h.num_edges())};
  for (std::size_t e = 0; e < h.num_edges(); ++e)
    for (std::size_t i : h.edge_members(e)) {
      const double w =
          1.0 / std::sqrt(static_cast<double>(h.node_degree(i)) * static_cast<double>(h.edge_degree(e)));
      ops.node_to_edge(e, i) = w;
      ops.edge_to_node(i, e) = w;
    }
  return ops;
}

std::vector<std::size_t> Partition::subset_order() const {
  std::vector<std::size_t> order = interior_nodes;
  order.insert(order.end(), boundary_nodes.begin(), boundary_nodes.end());
  return order;
}

Partition derive_partition(const Hypergraph& h, std::span<const std::size_t> subset) {
  require(!subset.empty(), "partition subset must be nonempty");
  Partition p;
  p.num_nodes = h.num_nodes();
  p.num_edges = h.num_edges();
  p.subset_indicator.assign(h.num_nodes(), 0);
  for (std::size_t v : subset) {
    if (v >= h.num_nodes()) fail(ErrorKind::Range, "partition node " + std::to_string(v) + " out of range");
    p.subset_indicator[v] = 1;
  }
  for (std::size_t v = 0; v < h.num_nodes(); ++v)
    if (p.subset_indicator[v]) p.subset.push_back(v);

  p.edge_indicator.assign(h.num_edges(), 0);
  std::vector<std::uint8_t> crossing(h.num_edges(), 0);
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    std::size_t inside = 0;
    for (std::size_t v : h.edge_members(e)) inside += p.subset_indicator[v];
    if (inside == h.edge_degree(e)) {
      p.edge_indicator[e] = 1;
      p.interior_edges.push_back(e);
    } else if (inside > 0) {
      crossing[e] = 1;
      p.boundary_edges.push_back(e);
    } else {
      p.exterior_edges.push_back(e);
    }
  }

  p.node_indicator.assign(h.num_nodes(), 0);
  for (std::size_t v = 0; v < h.num_nodes(); ++v) {
    if (!p.subset_indicator[v]) {
      p.exterior_nodes.push_back(v);
      continue;
    }
    const auto mem = h.node_memberships(v);
    const bool touches = std::any_of(mem.begin(), mem.end(), [&](std::size_t e) { return crossing[e] != 0; });
    if (touches) {
      p.boundary_nodes.push_back(v);
    } else {
      p.node_indicator[v] = 1;
      p.interior_nodes.push_back(v);
    }
  }
  return p;
}

Partition replicate_partition(const Hypergraph& h, const Partition& p, std::size_t copies) {
  require(p.num_nodes == h.num_nodes() && p.num_edges == h.num_edges(), "partition does not match hypergraph");
  std::vector<std::size_t> subset;
  for (std::size_t k = 0; k < copies; ++k)
    for (std::size_t v : p.subset) subset.push_back(v + k * h.num_nodes());
  return derive_partition(disjoint_union(h, copies), subset);
}

LaplacianBlocks restrict_laplacian(const DenseMatrix& L, const Partition& p) {
  if (L.rows() != p.num_nodes || L.cols() != p.num_nodes)
    fail(ErrorKind::InvalidArgument, "laplacian is " + std::to_string(L.rows()) + "x" + std::to_string(L.cols()) +
                                         " but partition covers " + std::to_string(p.num_nodes) + " nodes");
  return {L.submatrix(p.interior_nodes, p.interior_nodes), L.submatrix(p.interior_nodes, p.boundary_nodes),
          L.submatrix(p.boundary_nodes, p.interior_nodes), L.submatrix(p.boundary_nodes, p.boundary_nodes)};
}

}  // namespace heal
