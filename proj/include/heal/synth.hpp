#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "heal/dense.hpp"
#include "heal/hypergraph.hpp"

namespace heal {

struct TransferInstance {
  std::string topology;
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  Hypergraph hypergraph;
  std::size_t source = 0;
  std::size_t target = 0;
  std::size_t required_depth = 0;
  FeatureMatrix features;
  int label = 0;  // value carried by the source and expected at the target
};

constexpr std::size_t kTransferFeatureDim = 4;

TransferInstance gen_hes(std::size_t n, std::uint64_t seed);
TransferInstance gen_hep(std::size_t n, std::size_t m, std::uint64_t seed);
TransferInstance gen_her(std::size_t n, std::size_t m, std::uint64_t seed);
TransferInstance gen_hed(std::size_t n, std::size_t m, std::uint64_t seed);
TransferInstance gen_transfer(const std::string& topology, std::size_t n, std::size_t m, std::uint64_t seed);

std::size_t her_ring_length(std::size_t m);

// Hyperedge-hop distance; SIZE_MAX when unreachable.
std::size_t hop_distance(const Hypergraph& h, std::size_t from, std::size_t to);

struct CsbmParams {
  std::size_t n_nodes = 500;
  std::size_t n_edges = 100;
  int level = 1;
  std::size_t feature_dim = 16;
  std::size_t edge_size = 10;
  double mean_separation = 1.0;
  std::uint64_t seed = 0;
};

struct CsbmInstance {
  CsbmParams params;
  Hypergraph hypergraph;
  FeatureMatrix features;
  std::vector<int> labels;
  std::vector<std::size_t> train, val, test;
};

double csbm_class0_proportion(int level);
CsbmInstance gen_csbm(const CsbmParams& params);

// Two balanced classes; every node lies in node_degree edges of edge_size
// members. Each round of edges is class-pure except for one exchanged pair.
struct RegularParams {
  std::size_t n_nodes = 120;
  std::size_t node_degree = 2;
  std::size_t edge_size = 6;
  std::size_t feature_dim = 16;
  double mean_separation = 1.0;
  std::uint64_t seed = 0;
};

CsbmInstance gen_regular_homophilic(const RegularParams& params);

// Mean over hyperedges of the majority-class fraction.
double edge_majority_fraction(const Hypergraph& h, const std::vector<int>& labels);
// Fraction of same-label member pairs over all within-edge pairs.
double clique_homophily(const Hypergraph& h, const std::vector<int>& labels);

Hypergraph gen_random_uniform(std::size_t n, std::size_t m, std::size_t r, std::uint64_t seed);

// 2-uniform path of `length` nodes whose two end nodes each join `mouth`
// outside nodes; subset is the path.
struct TubeInstance {
  Hypergraph hypergraph;
  std::vector<std::size_t> subset;
};

TubeInstance gen_tube(std::size_t length, std::size_t mouth = 2);

std::string transfer_sidecar_json(const TransferInstance& t);
std::string csbm_sidecar_json(const CsbmInstance& c);

}  // namespace heal
