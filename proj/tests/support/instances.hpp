#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "heal/dense.hpp"
#include "heal/heatflow.hpp"
#include "heal/hypergraph.hpp"
#include "heal/rng.hpp"

namespace heal::fixtures {

// Connected hypergraph on n nodes with random edges of 2..max_edge members.
inline Hypergraph random_hypergraph(CounterRng& rng, std::size_t n, std::size_t max_edge = 5) {
  max_edge = std::min(max_edge, n);
  std::vector<std::vector<std::size_t>> edges;
  const std::size_t m = 1 + rng.below(n);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t size = 2 + rng.below(max_edge - 1);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < size; ++i) std::swap(pool[i], pool[i + rng.below(n - i)]);
    edges.emplace_back(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& e : edges)
    for (std::size_t v : e) parent[find(v)] = find(e.front());
  for (std::size_t v = 1; v < n; ++v)
    if (find(v) != find(0)) {
      edges.push_back({0, v});
      parent[find(v)] = find(0);
    }
  return build_hypergraph(std::move(edges), n);
}

inline FeatureMatrix random_matrix(CounterRng& rng, std::size_t rows, std::size_t cols) {
  FeatureMatrix x(rows, cols);
  for (double& v : x.values()) v = rng.normal();
  return x;
}

// Hop ball around a random centre, so every boundary node touches the
// interior. Empty when no ball leaves a nonempty boundary.
inline std::optional<Partition> random_solvable_partition(CounterRng& rng, const Hypergraph& h) {
  const std::size_t n = h.num_nodes();
  const std::size_t first = rng.below(n);
  for (std::size_t radius = 1 + rng.below(2); radius <= 2; ++radius)
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t centre = (first + k) % n;
      std::vector<std::size_t> dist(n, SIZE_MAX);
      std::vector<std::size_t> frontier{centre}, subset{centre};
      dist[centre] = 0;
      for (std::size_t r = 0; r < radius; ++r) {
        std::vector<std::size_t> next;
        for (std::size_t v : frontier)
          for (std::size_t e : h.node_memberships(v))
            for (std::size_t u : h.edge_members(e))
              if (dist[u] == SIZE_MAX) {
                dist[u] = r + 1;
                next.push_back(u);
              }
        subset.insert(subset.end(), next.begin(), next.end());
        frontier = std::move(next);
      }
      if (subset.size() == n) continue;
      std::sort(subset.begin(), subset.end());
      Partition p = derive_partition(h, subset);
      const auto counts = interior_neighbour_counts(h, p);
      if (!p.boundary_nodes.empty() &&
          std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }))
        return p;
    }
  return std::nullopt;
}

// Random proper subset with nonempty interior and boundary; falls back to a
// hop ball, then to a single node, when sampling keeps missing.
inline Partition random_partition(CounterRng& rng, const Hypergraph& h) {
  const std::size_t n = h.num_nodes();
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<std::size_t> subset;
    for (std::size_t v = 0; v < n; ++v)
      if (rng.uniform() < 0.6) subset.push_back(v);
    if (subset.empty() || subset.size() == n) continue;
    Partition p = derive_partition(h, subset);
    if (!p.interior_nodes.empty() && !p.boundary_nodes.empty()) return p;
  }
  if (auto p = random_solvable_partition(rng, h)) return *p;
  const std::size_t v = rng.below(n);
  return derive_partition(h, std::span<const std::size_t>(&v, 1));
}

}  // namespace heal::fixtures
