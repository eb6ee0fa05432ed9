#include "heal/synth.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <set>
#include <string>

#include "heal/error.hpp"
#include "heal/rng.hpp"
#include "json.hpp"

namespace heal {

namespace {

enum Stream : std::uint64_t { kTransferStream = 0x7a5, kLabelStream = 0x1ab, kFeatureStream = 0xfea,
                              kEdgeStream = 0xed9, kSplitStream = 0x5b1, kUniformStream = 0x0f1 };

void fill_transfer_features(TransferInstance& t) {
  CounterRng rng(t.seed, kTransferStream);
  t.label = static_cast<int>(rng.below(2));
  t.features = FeatureMatrix(t.hypergraph.num_nodes(), kTransferFeatureDim);
  for (std::size_t v = 0; v < t.hypergraph.num_nodes(); ++v)
    for (std::size_t c = 0; c < kTransferFeatureDim; ++c) {
      const double noise = rng.uniform();
      if (v == t.source) t.features(v, c) = t.label;
      else if (v == t.target) t.features(v, c) = 0.0;
      else t.features(v, c) = noise;
    }
}

struct Ring {
  std::vector<std::vector<std::size_t>> edges;
  std::vector<std::vector<std::size_t>> privates;  // per edge
  std::size_t nodes = 0;
};

// Edge k holds shared nodes k and k+1 (mod L) plus n-2 private nodes.
Ring make_ring(std::size_t n, std::size_t length, std::size_t base) {
  Ring r;
  r.nodes = length + length * (n - 2);
  for (std::size_t k = 0; k < length; ++k) {
    std::vector<std::size_t> e{base + k, base + (k + 1) % length};
    std::vector<std::size_t> priv;
    for (std::size_t j = 0; j < n - 2; ++j) priv.push_back(base + length + k * (n - 2) + j);
    e.insert(e.end(), priv.begin(), priv.end());
    r.edges.push_back(std::move(e));
    r.privates.push_back(std::move(priv));
  }
  return r;
}

void check_ring_args(std::size_t n, std::size_t m, const char* name) {
  if (m < 1) fail(ErrorKind::InvalidArgument, std::string(name) + " needs m >= 1");
  if (n < 3) fail(ErrorKind::InvalidArgument, std::string(name) + " needs hyperedges of size >= 3");
  if (m == 1 && n < 4)
    fail(ErrorKind::InvalidArgument, std::string(name) + " with m = 1 needs hyperedges of size >= 4");
}

}  // namespace

TransferInstance gen_hes(std::size_t n, std::uint64_t seed) {
  if (n < 2) fail(ErrorKind::InvalidArgument, "HES needs n >= 2");
  TransferInstance t;
  t.topology = "hes";
  t.n = n;
  t.seed = seed;
  std::vector<std::size_t> e(n);
  std::iota(e.begin(), e.end(), 0);
  t.hypergraph = build_hypergraph({e}, n);
  t.source = 0;
  t.target = n - 1;
  t.required_depth = 1;
  fill_transfer_features(t);
  return t;
}

TransferInstance gen_hep(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 2) fail(ErrorKind::InvalidArgument, "HEP needs n >= 2");
  if (m == 0) {
    TransferInstance t = gen_hes(n, seed);
    t.topology = "hep";
    return t;
  }
  TransferInstance t;
  t.topology = "hep";
  t.n = n;
  t.m = m;
  t.seed = seed;
  std::vector<std::size_t> head(n);
  std::iota(head.begin(), head.end(), 0);
  std::vector<std::vector<std::size_t>> edges{head};
  // The chain hangs off the lowest-index member other than the source.
  std::size_t prev = 1;
  for (std::size_t k = 0; k < m; ++k) {
    edges.push_back({prev, n + k});
    prev = n + k;
  }
  t.hypergraph = build_hypergraph(std::move(edges), n + m);
  t.source = 0;
  t.target = n + m - 1;
  t.required_depth = m + 1;
  fill_transfer_features(t);
  return t;
}

std::size_t her_ring_length(std::size_t m) { return std::max<std::size_t>(2 * m, 3); }

TransferInstance gen_her(std::size_t n, std::size_t m, std::uint64_t seed) {
  check_ring_args(n, m, "HER");
  TransferInstance t;
  t.topology = "her";
  t.n = n;
  t.m = m;
  t.seed = seed;
  Ring r = make_ring(n, her_ring_length(m), 0);
  t.source = r.privates[0].front();
  t.target = r.privates[m - 1].back();
  t.hypergraph = build_hypergraph(r.edges, r.nodes);
  t.required_depth = m;
  fill_transfer_features(t);
  return t;
}

TransferInstance gen_hed(std::size_t n, std::size_t m, std::uint64_t seed) {
  check_ring_args(n, m, "HED");
  TransferInstance t;
  t.topology = "hed";
  t.n = n;
  t.m = m;
  t.seed = seed;
  const std::size_t length = her_ring_length(m);
  Ring a = make_ring(n, length, 0);
  Ring b = make_ring(n, length, a.nodes);
  std::vector<std::vector<std::size_t>> edges = a.edges;
  edges.insert(edges.end(), b.edges.begin(), b.edges.end());
  const std::size_t bridge_base = a.nodes + b.nodes;
  const std::size_t from = a.privates[m - 1].back();
  const std::size_t to = b.privates[0].front();
  edges.push_back({from, bridge_base});
  edges.push_back({bridge_base, bridge_base + 1});
  edges.push_back({bridge_base + 1, bridge_base + 2});
  edges.push_back({bridge_base + 2, to});
  t.hypergraph = build_hypergraph(std::move(edges), bridge_base + 3);
  t.source = a.privates[0].front();
  t.target = b.privates[m - 1].back();
  t.required_depth = 2 * m + 4;
  fill_transfer_features(t);
  return t;
}

TransferInstance gen_transfer(const std::string& topology, std::size_t n, std::size_t m, std::uint64_t seed) {
  if (topology == "hes") return gen_hes(n, seed);
  if (topology == "hep") return gen_hep(n, m, seed);
  if (topology == "her") return gen_her(n, m, seed);
  if (topology == "hed") return gen_hed(n, m, seed);
  fail(ErrorKind::InvalidArgument, "unknown topology '" + topology + "'");
}

std::size_t hop_distance(const Hypergraph& h, std::size_t from, std::size_t to) {
  std::vector<std::size_t> dist(h.num_nodes(), SIZE_MAX);
  std::vector<std::uint8_t> edge_seen(h.num_edges(), 0);
  std::deque<std::size_t> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    if (v == to) return dist[v];
    for (std::size_t e : h.node_memberships(v)) {
      if (edge_seen[e]) continue;
      edge_seen[e] = 1;
      for (std::size_t u : h.edge_members(e))
        if (dist[u] == SIZE_MAX) {
          dist[u] = dist[v] + 1;
          queue.push_back(u);
        }
    }
  }
  return dist[to];
}

double csbm_class0_proportion(int level) {
  if (level < 1 || level > 7) fail(ErrorKind::Range, "heterophily level must lie in 1..7, got " + std::to_string(level));
  return 0.95 - 0.075 * static_cast<double>(level - 1);
}

namespace {

// Balanced labels, class-conditional Gaussian features and a 50/25/25 split.
void fill_nodes(CsbmInstance& c, std::size_t n, std::size_t feature_dim, double separation, std::uint64_t seed) {
  CounterRng label_rng(seed, kLabelStream);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[label_rng.below(i)]);
  c.labels.assign(n, 0);
  for (std::size_t k = n / 2; k < n; ++k) c.labels[perm[k]] = 1;

  CounterRng feat_rng(seed, kFeatureStream);
  c.features = FeatureMatrix(n, feature_dim);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t d = 0; d < feature_dim; ++d) c.features(v, d) = feat_rng.normal();
    c.features(v, 0) += (c.labels[v] == 1 ? 1.0 : -1.0) * separation;
  }

  CounterRng split_rng(seed, kSplitStream);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[split_rng.below(i)]);
  const std::size_t n_train = n / 2, n_val = n / 4;
  c.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  c.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  c.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  std::sort(c.train.begin(), c.train.end());
  std::sort(c.val.begin(), c.val.end());
  std::sort(c.test.begin(), c.test.end());
}

}  // namespace

CsbmInstance gen_csbm(const CsbmParams& params) {
  const double p = csbm_class0_proportion(params.level);
  require(params.n_nodes >= 4 && params.n_edges >= 2, "csbm needs at least 4 nodes and 2 edges");
  require(params.edge_size >= 2 && params.feature_dim >= 1, "csbm needs edge_size >= 2 and feature_dim >= 1");
  require(params.edge_size <= params.n_nodes / 2, "csbm edge_size exceeds the class size");
  CsbmInstance c;
  c.params = params;
  const std::size_t n = params.n_nodes;

  // Labels, features and splits ignore the level so that levels share them.
  fill_nodes(c, n, params.feature_dim, params.mean_separation, params.seed);
  std::vector<std::vector<std::size_t>> by_class(2);
  for (std::size_t v = 0; v < n; ++v) by_class[static_cast<std::size_t>(c.labels[v])].push_back(v);

  // Even edges lean toward class 0 with proportion p, odd edges toward class 1.
  CounterRng edge_rng(params.seed, kEdgeStream, static_cast<std::uint64_t>(params.level));
  std::vector<std::vector<std::size_t>> edges(params.n_edges);
  std::vector<std::uint8_t> covered(n, 0);
  for (std::size_t k = 0; k < params.n_edges; ++k) {
    const double pk = k % 2 == 0 ? p : 1.0 - p;
    std::set<std::size_t> members;
    while (members.size() < params.edge_size) {
      const std::size_t cls = edge_rng.uniform() < pk ? 0 : 1;
      const auto& pool = by_class[cls];
      members.insert(pool[edge_rng.below(pool.size())]);
    }
    edges[k].assign(members.begin(), members.end());
    for (std::size_t v : members) covered[v] = 1;
  }
  // Uncovered nodes join an edge leaning toward their own class with probability p.
  for (std::size_t v = 0; v < n; ++v) {
    if (covered[v]) continue;
    const bool own = edge_rng.uniform() < p;
    const std::size_t parity = (static_cast<std::size_t>(c.labels[v]) + (own ? 0 : 1)) % 2;
    const std::size_t slots = (params.n_edges - parity + 1) / 2;
    const std::size_t k = parity + 2 * edge_rng.below(slots);
    edges[k].push_back(v);
  }
  c.hypergraph = build_hypergraph(std::move(edges), n);
  return c;
}

CsbmInstance gen_regular_homophilic(const RegularParams& params) {
  const std::size_t n = params.n_nodes;
  require(params.edge_size >= 2 && params.node_degree >= 1 && params.feature_dim >= 1,
          "regular instance needs edge_size >= 2, node_degree >= 1 and feature_dim >= 1");
  require(n % 2 == 0 && (n / 2) % params.edge_size == 0 && n / 2 >= 2 * params.edge_size,
          "regular instance needs each class size to be a multiple of edge_size, at least two edges per class");
  CsbmInstance c;
  c.params.n_nodes = n;
  c.params.n_edges = params.node_degree * n / params.edge_size;
  c.params.feature_dim = params.feature_dim;
  c.params.edge_size = params.edge_size;
  c.params.mean_separation = params.mean_separation;
  c.params.seed = params.seed;
  fill_nodes(c, n, params.feature_dim, params.mean_separation, params.seed);
  std::vector<std::vector<std::size_t>> by_class(2);
  for (std::size_t v = 0; v < n; ++v) by_class[static_cast<std::size_t>(c.labels[v])].push_back(v);

  const std::size_t per_class = n / 2 / params.edge_size;
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    CounterRng rng(params.seed, kEdgeStream, 0x7e9ULL, attempt);
    std::vector<std::vector<std::size_t>> edges;
    for (std::size_t round = 0; round < params.node_degree; ++round) {
      auto pools = by_class;
      for (auto& pool : pools)
        for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.below(i)]);
      for (std::size_t k = 0; k < per_class; ++k) {
        std::vector<std::size_t> a(pools[0].begin() + static_cast<std::ptrdiff_t>(k * params.edge_size),
                                   pools[0].begin() + static_cast<std::ptrdiff_t>((k + 1) * params.edge_size));
        std::vector<std::size_t> b(pools[1].begin() + static_cast<std::ptrdiff_t>(k * params.edge_size),
                                   pools[1].begin() + static_cast<std::ptrdiff_t>((k + 1) * params.edge_size));
        // Exchanging one member keeps every degree fixed and links the classes.
        if (k == 0) std::swap(a.front(), b.front());
        edges.push_back(std::move(a));
        edges.push_back(std::move(b));
      }
    }
    Hypergraph h = build_hypergraph(std::move(edges), n);
    if (h.is_connected()) {
      c.hypergraph = std::move(h);
      return c;
    }
  }
  fail(ErrorKind::Numerical, "could not draw a connected regular instance in 100 attempts");
}

double edge_majority_fraction(const Hypergraph& h, const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    std::size_t ones = 0;
    for (std::size_t v : h.edge_members(e)) ones += labels[v] == 1;
    const std::size_t d = h.edge_degree(e);
    total += static_cast<double>(std::max(ones, d - ones)) / static_cast<double>(d);
  }
  return total / static_cast<double>(h.num_edges());
}

double clique_homophily(const Hypergraph& h, const std::vector<int>& labels) {
  double same = 0.0, pairs = 0.0;
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    double ones = 0.0;
    for (std::size_t v : h.edge_members(e)) ones += labels[v] == 1;
    const double d = static_cast<double>(h.edge_degree(e));
    const double zeros = d - ones;
    same += ones * (ones - 1) / 2 + zeros * (zeros - 1) / 2;
    pairs += d * (d - 1) / 2;
  }
  return pairs > 0 ? same / pairs : 1.0;
}

Hypergraph gen_random_uniform(std::size_t n, std::size_t m, std::size_t r, std::uint64_t seed) {
  require(r >= 2 && r <= n, "uniform hypergraph needs 2 <= r <= n");
  const std::size_t min_edges = (n - 1 + r - 2) / (r - 1);
  if (m < min_edges)
    fail(ErrorKind::InvalidArgument, "need at least " + std::to_string(min_edges) + " hyperedges of size " +
                                         std::to_string(r) + " to connect " + std::to_string(n) + " nodes");
  // Guard against asking for more distinct edges than exist.
  double combos = 1.0;
  for (std::size_t k = 0; k < r; ++k) combos = combos * static_cast<double>(n - k) / static_cast<double>(k + 1);
  if (static_cast<double>(m) > combos) fail(ErrorKind::InvalidArgument, "more hyperedges requested than exist");

  constexpr int kMaxAttempts = 1000;
  std::vector<std::size_t> pool(n);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    CounterRng rng(seed, kUniformStream, static_cast<std::uint64_t>(attempt));
    std::set<std::vector<std::size_t>> seen;
    std::vector<std::vector<std::size_t>> edges;
    std::vector<std::uint8_t> covered(n, 0);
    while (edges.size() < m) {
      std::iota(pool.begin(), pool.end(), 0);
      for (std::size_t k = 0; k < r; ++k) std::swap(pool[k], pool[k + rng.below(n - k)]);
      std::vector<std::size_t> e(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(r));
      std::sort(e.begin(), e.end());
      if (!seen.insert(e).second) continue;
      for (std::size_t v : e) covered[v] = 1;
      edges.push_back(std::move(e));
    }
    if (std::find(covered.begin(), covered.end(), 0) != covered.end()) continue;
    Hypergraph h = build_hypergraph(std::move(edges), n);
    if (h.is_connected()) return h;
  }
  fail(ErrorKind::Numerical, "no connected uniform hypergraph found after " + std::to_string(kMaxAttempts) +
                                 " attempts");
}

TubeInstance gen_tube(std::size_t length, std::size_t mouth) {
  require(length >= 3, "tube needs at least 3 path nodes");
  require(mouth >= 1, "tube needs at least one outside node per end");
  std::vector<std::vector<std::size_t>> edges;
  for (std::size_t i = 0; i + 1 < length; ++i) edges.push_back({i, i + 1});
  std::size_t next = length;
  for (std::size_t end : {std::size_t{0}, length - 1})
    for (std::size_t k = 0; k < mouth; ++k) edges.push_back({end, next++});
  TubeInstance t;
  t.hypergraph = build_hypergraph(std::move(edges), next);
  t.subset.resize(length);
  std::iota(t.subset.begin(), t.subset.end(), 0);
  return t;
}

std::string transfer_sidecar_json(const TransferInstance& t) {
  nlohmann::json j = {{"topology", t.topology},
                      {"n", t.n},
                      {"m", t.m},
                      {"seed", t.seed},
                      {"source", t.source},
                      {"target", t.target},
                      {"required_depth", t.required_depth},
                      {"label", t.label},
                      {"feature_dim", t.features.cols()},
                      {"features", t.features.values()}};
  if (t.topology == "her" || t.topology == "hed") j["ring_length"] = her_ring_length(t.m);
  return j.dump(1);
}

std::string csbm_sidecar_json(const CsbmInstance& c) {
  const CsbmParams& p = c.params;
  nlohmann::json j = {{"topology", "csbm"},
                      {"n_nodes", p.n_nodes},
                      {"n_edges", p.n_edges},
                      {"level", p.level},
                      {"class0_proportion", csbm_class0_proportion(p.level)},
                      {"feature_dim", p.feature_dim},
                      {"edge_size", p.edge_size},
                      {"mean_separation", p.mean_separation},
                      {"seed", p.seed},
                      {"labels", c.labels},
                      {"train", c.train},
                      {"val", c.val},
                      {"test", c.test},
                      {"features", c.features.values()}};
  return j.dump(1);
}

}  // namespace heal
