#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "heal/autodiff.hpp"
#include "heal/dense.hpp"
#include "heal/hypergraph.hpp"

namespace heal {

constexpr double kAlphaFloor = 1e-3;

// Precomputed sparse propagation for one (hypergraph, partition) pair. Nodes
// and edges outside the subset count as inner (indicator 1).
struct LayerGraph {
  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  double lambda = 1.0;
  double mu = 1.0;
  std::vector<double> node_inner;
  std::vector<double> edge_inner;
  ad::GatherPlan node_fixed;     // S_ij / sqrt(d_i d_j) * (I_i I_j + I_i)
  ad::GatherPlan node_boundary;  // S_ij / sqrt(d_i d_j) * I_j on boundary rows
  ad::GatherPlan edge_to_node;   // mu / sqrt(d_i d_e)
  ad::GatherPlan edge_fixed;
  ad::GatherPlan edge_boundary;
  ad::GatherPlan node_to_edge;   // lambda / sqrt(d_i d_e)
  ad::GatherPlan edge_mean;      // member average, used for the initial edge state
  ad::GatherPlan hgnn;           // D^-1/2 H D_E^-1 H^T D^-1/2
};

LayerGraph build_layer_graph(const Hypergraph& h, const Partition& p, double lambda = 1.0, double mu = 1.0);

struct Coefficients {
  std::vector<double> alpha_v, beta_v;
  DenseMatrix gamma_v;
  std::vector<double> alpha_e, beta_e;
  DenseMatrix gamma_e;
};

FeatureMatrix nodewise_update(const LayerGraph& g, const FeatureMatrix& xv, const FeatureMatrix& xe,
                              const std::vector<double>& alpha_v, const std::vector<double>& beta_v,
                              const FeatureMatrix& gamma_v);
FeatureMatrix edgewise_update(const LayerGraph& g, const FeatureMatrix& xv, const FeatureMatrix& xe,
                              const std::vector<double>& alpha_e, const std::vector<double>& beta_e,
                              const FeatureMatrix& gamma_e);

FeatureMatrix nodewise_update(const Hypergraph& h, const Partition& p, const FeatureMatrix& xv,
                              const FeatureMatrix& xe, const std::vector<double>& alpha_v,
                              const std::vector<double>& beta_v, const FeatureMatrix& gamma_v, double mu);
FeatureMatrix edgewise_update(const Hypergraph& h, const Partition& p, const FeatureMatrix& xv,
                              const FeatureMatrix& xe, const std::vector<double>& alpha_e,
                              const std::vector<double>& beta_e, const FeatureMatrix& gamma_e, double lambda);

// Rows and columns follow [inner nodes | boundary nodes | inner edges | boundary edges].
struct BlockSystem {
  DenseMatrix matrix;
  std::vector<std::size_t> node_order;
  std::size_t inner_node_count = 0;
  std::vector<std::size_t> edge_order;
  std::size_t inner_edge_count = 0;
  std::size_t num_nodes() const { return node_order.size(); }
  std::size_t num_edges() const { return edge_order.size(); }
  std::size_t block_offset(int block) const;
  std::size_t block_size(int block) const;
};

BlockSystem assemble_block_system(const Hypergraph& h, const Partition& p, const std::vector<double>& alpha_v,
                                  const std::vector<double>& beta_v, const std::vector<double>& alpha_e,
                                  const std::vector<double>& beta_e, double lambda, double mu);

struct JacobiSplit {
  std::vector<double> diagonal;
  DenseMatrix upper;
  DenseMatrix lower;
};

// Off-diagonal blocks of D - A go to U (above) or V (below); the two inner
// Laplacian diagonal blocks contribute I - L to both.
JacobiSplit jacobi_split(const BlockSystem& sys);

FeatureMatrix stack_state(const BlockSystem& sys, const FeatureMatrix& node_rows, const FeatureMatrix& edge_rows);
std::pair<FeatureMatrix, FeatureMatrix> unstack_state(const BlockSystem& sys, const FeatureMatrix& stacked);

// D^-1 (U + V) X + D^-1 Gamma on the stacked state.
FeatureMatrix jacobi_apply(const BlockSystem& sys, const FeatureMatrix& stacked, const FeatureMatrix& gamma_stacked);

struct Ablation {
  bool gamma = false;
  bool beta = false;
  bool coupling = false;
  bool any() const { return gamma || beta || coupling; }
};

Ablation parse_ablation(const std::string& name);

struct LayerOptions {
  bool train = false;
  double dropout = 0.0;
  std::uint64_t dropout_key = 0;
  bool layernorm = true;
  bool identity_activation = false;
  Ablation ablation;
};

using VarMap = std::map<std::string, ad::Var>;

std::string layer_prefix(std::size_t layer);

struct CoefficientVars {
  ad::Var alpha_v, beta_v, gamma_v, alpha_e, beta_e, gamma_e;
};

CoefficientVars coefficient_maps(const VarMap& w, const std::string& prefix, ad::Var xv, ad::Var xe);
Coefficients coefficient_maps(const FeatureMatrix& xv, const FeatureMatrix& xe, const ad::ParameterSet& params,
                              const std::string& prefix);

std::pair<ad::Var, ad::Var> layer_forward(const LayerGraph& g, ad::Var xv, ad::Var xe, const VarMap& w,
                                          const std::string& prefix, const LayerOptions& opt);

ad::Var plain_layer_forward(const LayerGraph& g, ad::Var x, const VarMap& w, const std::string& prefix,
                            const LayerOptions& opt);

// Names and shapes of the per-layer tensors.
std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> layer_parameter_shapes(
    const std::string& prefix, std::size_t hidden);
std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> plain_layer_parameter_shapes(
    const std::string& prefix, std::size_t hidden);

}  // namespace heal
