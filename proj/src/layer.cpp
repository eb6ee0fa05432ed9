#include "heal/layer.hpp"

#include <cmath>
#include <string>

#include "heal/error.hpp"
#include "heal/rng.hpp"

namespace heal {

namespace {

double inv_sqrt_product(std::size_t a, std::size_t b) {
  return 1.0 / std::sqrt(static_cast<double>(a) * static_cast<double>(b));
}

}  // namespace

LayerGraph build_layer_graph(const Hypergraph& h, const Partition& p, double lambda, double mu) {
  require(p.num_nodes == h.num_nodes() && p.num_edges == h.num_edges(), "partition does not match hypergraph");
  LayerGraph g;
  g.num_nodes = h.num_nodes();
  g.num_edges = h.num_edges();
  g.lambda = lambda;
  g.mu = mu;
  g.node_inner.resize(g.num_nodes);
  g.edge_inner.resize(g.num_edges);
  for (std::size_t v = 0; v < g.num_nodes; ++v) g.node_inner[v] = p.is_boundary_node(v) ? 0.0 : 1.0;
  for (std::size_t e = 0; e < g.num_edges; ++e) g.edge_inner[e] = p.edge_indicator[e] ? 1.0 : 0.0;
  for (std::size_t e : p.exterior_edges) g.edge_inner[e] = 1.0;

  const auto node_pairs = node_pair_weights(h);
  const auto edge_pairs = edge_pair_weights(h);
  const auto edge_deg = h.edge_degrees();

  g.node_fixed.input_rows = g.node_boundary.input_rows = g.num_nodes;
  g.edge_to_node.input_rows = g.num_edges;
  g.hgnn.input_rows = g.num_nodes;
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    const double ii = g.node_inner[i];
    for (const auto& [j, s] : node_pairs[i]) {
      const double base = s * inv_sqrt_product(h.node_degree(i), h.node_degree(j));
      const double fixed = base * (ii * g.node_inner[j] + ii);
      if (fixed != 0.0) g.node_fixed.add(j, fixed);
      if (ii == 0.0 && g.node_inner[j] != 0.0) g.node_boundary.add(j, base);
      g.hgnn.add(j, base);
    }
    g.node_fixed.end_row();
    g.node_boundary.end_row();
    g.hgnn.end_row();
    for (std::size_t e : h.node_memberships(i)) g.edge_to_node.add(e, mu * inv_sqrt_product(h.node_degree(i), edge_deg[e]));
    g.edge_to_node.end_row();
  }

  g.edge_fixed.input_rows = g.edge_boundary.input_rows = g.num_edges;
  g.node_to_edge.input_rows = g.edge_mean.input_rows = g.num_nodes;
  for (std::size_t e = 0; e < g.num_edges; ++e) {
    const double je = g.edge_inner[e];
    for (const auto& [f, s] : edge_pairs[e]) {
      const double base = s * inv_sqrt_product(edge_deg[e], edge_deg[f]);
      const double fixed = base * (je * g.edge_inner[f] + je);
      if (fixed != 0.0) g.edge_fixed.add(f, fixed);
      if (je == 0.0 && g.edge_inner[f] != 0.0) g.edge_boundary.add(f, base);
    }
    g.edge_fixed.end_row();
    g.edge_boundary.end_row();
    for (std::size_t i : h.edge_members(e)) {
      g.node_to_edge.add(i, lambda * inv_sqrt_product(h.node_degree(i), edge_deg[e]));
      g.edge_mean.add(i, 1.0 / static_cast<double>(edge_deg[e]));
    }
    g.node_to_edge.end_row();
    g.edge_mean.end_row();
  }
  return g;
}

namespace {

void check_coefficients(std::size_t count, const std::vector<double>& alpha, const std::vector<double>& beta,
                        const FeatureMatrix& gamma, std::size_t width, const char* domain) {
  require(alpha.size() == count && beta.size() == count, std::string(domain) + " coefficients have the wrong length");
  require(gamma.empty() || (gamma.rows() == count && gamma.cols() == width),
          std::string(domain) + " gamma has the wrong shape");
  for (std::size_t i = 0; i < count; ++i) {
    if (!(alpha[i] >= kAlphaFloor))
      fail(ErrorKind::Numerical, std::string(domain) + " alpha below floor at index " + std::to_string(i));
    if (!(beta[i] >= 0)) fail(ErrorKind::InvalidArgument, std::string(domain) + " beta must be nonnegative");
  }
}

FeatureMatrix side_update(const ad::GatherPlan& fixed, const ad::GatherPlan& boundary, const ad::GatherPlan& cross,
                          const std::vector<double>& inner, const FeatureMatrix& same, const FeatureMatrix& other,
                          const std::vector<double>& alpha, const std::vector<double>& beta,
                          const FeatureMatrix& gamma) {
  FeatureMatrix out = fixed.apply(same);
  const FeatureMatrix bd = boundary.apply(same);
  const FeatureMatrix cr = cross.apply(other);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const double p = beta[i] / alpha[i];
    const double s = inner[i] != 0.0 ? 1.0 : 1.0 / alpha[i];
    for (std::size_t c = 0; c < out.cols(); ++c) {
      out(i, c) += p * bd(i, c) + s * cr(i, c);
      if (!gamma.empty()) out(i, c) += s * gamma(i, c);
    }
  }
  return out;
}

}  // namespace

FeatureMatrix nodewise_update(const LayerGraph& g, const FeatureMatrix& xv, const FeatureMatrix& xe,
                              const std::vector<double>& alpha_v, const std::vector<double>& beta_v,
                              const FeatureMatrix& gamma_v) {
  require(xv.rows() == g.num_nodes && xe.rows() == g.num_edges && xv.cols() == xe.cols(),
          "node and edge states do not match the layer graph");
  check_coefficients(g.num_nodes, alpha_v, beta_v, gamma_v, xv.cols(), "node");
  return side_update(g.node_fixed, g.node_boundary, g.edge_to_node, g.node_inner, xv, xe, alpha_v, beta_v, gamma_v);
}

FeatureMatrix edgewise_update(const LayerGraph& g, const FeatureMatrix& xv, const FeatureMatrix& xe,
                              const std::vector<double>& alpha_e, const std::vector<double>& beta_e,
                              const FeatureMatrix& gamma_e) {
  require(xv.rows() == g.num_nodes && xe.rows() == g.num_edges && xv.cols() == xe.cols(),
          "node and edge states do not match the layer graph");
  check_coefficients(g.num_edges, alpha_e, beta_e, gamma_e, xe.cols(), "edge");
  return side_update(g.edge_fixed, g.edge_boundary, g.node_to_edge, g.edge_inner, xe, xv, alpha_e, beta_e, gamma_e);
}

FeatureMatrix nodewise_update(const Hypergraph& h, const Partition& p, const FeatureMatrix& xv,
                              const FeatureMatrix& xe, const std::vector<double>& alpha_v,
                              const std::vector<double>& beta_v, const FeatureMatrix& gamma_v, double mu) {
  return nodewise_update(build_layer_graph(h, p, 1.0, mu), xv, xe, alpha_v, beta_v, gamma_v);
}

FeatureMatrix edgewise_update(const Hypergraph& h, const Partition& p, const FeatureMatrix& xv,
                              const FeatureMatrix& xe, const std::vector<double>& alpha_e,
                              const std::vector<double>& beta_e, const FeatureMatrix& gamma_e, double lambda) {
  return edgewise_update(build_layer_graph(h, p, lambda, 1.0), xv, xe, alpha_e, beta_e, gamma_e);
}

std::size_t BlockSystem::block_offset(int block) const {
  switch (block) {
    case 0: return 0;
    case 1: return inner_node_count;
    case 2: return num_nodes();
    case 3: return num_nodes() + inner_edge_count;
    default: return num_nodes() + num_edges();
  }
}

std::size_t BlockSystem::block_size(int block) const { return block_offset(block + 1) - block_offset(block); }

BlockSystem assemble_block_system(const Hypergraph& h, const Partition& p, const std::vector<double>& alpha_v,
                                  const std::vector<double>& beta_v, const std::vector<double>& alpha_e,
                                  const std::vector<double>& beta_e, double lambda, double mu) {
  require(p.num_nodes == h.num_nodes() && p.num_edges == h.num_edges(), "partition does not match hypergraph");
  check_coefficients(h.num_nodes(), alpha_v, beta_v, {}, 0, "node");
  check_coefficients(h.num_edges(), alpha_e, beta_e, {}, 0, "edge");
  BlockSystem sys;
  sys.node_order = p.interior_nodes;
  sys.node_order.insert(sys.node_order.end(), p.exterior_nodes.begin(), p.exterior_nodes.end());
  sys.inner_node_count = sys.node_order.size();
  sys.node_order.insert(sys.node_order.end(), p.boundary_nodes.begin(), p.boundary_nodes.end());
  sys.edge_order = p.interior_edges;
  sys.edge_order.insert(sys.edge_order.end(), p.exterior_edges.begin(), p.exterior_edges.end());
  sys.inner_edge_count = sys.edge_order.size();
  sys.edge_order.insert(sys.edge_order.end(), p.boundary_edges.begin(), p.boundary_edges.end());

  const std::size_t nv = h.num_nodes(), ne = h.num_edges();
  std::vector<std::size_t> node_pos(nv), edge_pos(ne);
  for (std::size_t k = 0; k < nv; ++k) node_pos[sys.node_order[k]] = k;
  for (std::size_t k = 0; k < ne; ++k) edge_pos[sys.edge_order[k]] = k;

  const DenseMatrix Lv = node_laplacian(h);
  const DenseMatrix Le = edge_laplacian(h);
  const auto ops = propagation_operators(h);
  DenseMatrix& A = sys.matrix = DenseMatrix(nv + ne, nv + ne);

  for (std::size_t a = 0; a < nv; ++a) {
    const std::size_t i = sys.node_order[a];
    const bool inner = a < sys.inner_node_count;
    if (inner) {
      for (std::size_t j = 0; j < nv; ++j) A(a, node_pos[j]) = Lv(i, j);
    } else {
      A(a, a) = alpha_v[i];
      for (std::size_t b = 0; b < sys.inner_node_count; ++b) A(a, b) = beta_v[i] * Lv(i, sys.node_order[b]);
    }
    for (std::size_t e : h.node_memberships(i)) A(a, nv + edge_pos[e]) = -mu * ops.edge_to_node(i, e);
  }
  for (std::size_t a = 0; a < ne; ++a) {
    const std::size_t e = sys.edge_order[a];
    const std::size_t row = nv + a;
    const bool inner = a < sys.inner_edge_count;
    if (inner) {
      for (std::size_t f = 0; f < ne; ++f) A(row, nv + edge_pos[f]) = Le(e, f);
    } else {
      A(row, row) = alpha_e[e];
      for (std::size_t b = 0; b < sys.inner_edge_count; ++b) A(row, nv + b) = beta_e[e] * Le(e, sys.edge_order[b]);
    }
    for (std::size_t i : h.edge_members(e)) A(row, node_pos[i]) = -lambda * ops.node_to_edge(e, i);
  }
  return sys;
}

JacobiSplit jacobi_split(const BlockSystem& sys) {
  const std::size_t n = sys.matrix.rows();
  JacobiSplit s;
  s.diagonal.assign(n, 1.0);
  for (int blk : {1, 3})
    for (std::size_t k = sys.block_offset(blk); k < sys.block_offset(blk + 1); ++k) s.diagonal[k] = sys.matrix(k, k);
  s.upper = DenseMatrix(n, n);
  s.lower = DenseMatrix(n, n);
  auto block_of = [&](std::size_t k) {
    int b = 0;
    while (k >= sys.block_offset(b + 1)) ++b;
    return b;
  };
  for (std::size_t r = 0; r < n; ++r) {
    const int br = block_of(r);
    for (std::size_t c = 0; c < n; ++c) {
      const int bc = block_of(c);
      const double n_rc = (r == c ? s.diagonal[r] : 0.0) - sys.matrix(r, c);
      if (bc > br) s.upper(r, c) = n_rc;
      else if (bc < br) s.lower(r, c) = n_rc;
      else if (br == 0 || br == 2) {
        s.upper(r, c) = n_rc;
        s.lower(r, c) = n_rc;
      }
    }
  }
  return s;
}

FeatureMatrix stack_state(const BlockSystem& sys, const FeatureMatrix& node_rows, const FeatureMatrix& edge_rows) {
  require(node_rows.rows() == sys.num_nodes() && edge_rows.rows() == sys.num_edges() &&
              node_rows.cols() == edge_rows.cols(),
          "state does not match block system");
  FeatureMatrix out(sys.num_nodes() + sys.num_edges(), node_rows.cols());
  for (std::size_t k = 0; k < sys.num_nodes(); ++k)
    for (std::size_t c = 0; c < out.cols(); ++c) out(k, c) = node_rows(sys.node_order[k], c);
  for (std::size_t k = 0; k < sys.num_edges(); ++k)
    for (std::size_t c = 0; c < out.cols(); ++c) out(sys.num_nodes() + k, c) = edge_rows(sys.edge_order[k], c);
  return out;
}

std::pair<FeatureMatrix, FeatureMatrix> unstack_state(const BlockSystem& sys, const FeatureMatrix& stacked) {
  require(stacked.rows() == sys.num_nodes() + sys.num_edges(), "stacked state has the wrong size");
  FeatureMatrix nodes(sys.num_nodes(), stacked.cols()), edges(sys.num_edges(), stacked.cols());
  for (std::size_t k = 0; k < sys.num_nodes(); ++k)
    for (std::size_t c = 0; c < stacked.cols(); ++c) nodes(sys.node_order[k], c) = stacked(k, c);
  for (std::size_t k = 0; k < sys.num_edges(); ++k)
    for (std::size_t c = 0; c < stacked.cols(); ++c) edges(sys.edge_order[k], c) = stacked(sys.num_nodes() + k, c);
  return {nodes, edges};
}

FeatureMatrix jacobi_apply(const BlockSystem& sys, const FeatureMatrix& stacked, const FeatureMatrix& gamma_stacked) {
  const JacobiSplit s = jacobi_split(sys);
  FeatureMatrix out = (s.upper + s.lower) * stacked;
  if (!gamma_stacked.empty()) out += gamma_stacked;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (double& v : out.row(r)) v /= s.diagonal[r];
  return out;
}

Ablation parse_ablation(const std::string& name) {
  Ablation a;
  if (name == "none") return a;
  if (name == "gamma") a.gamma = true;
  else if (name == "beta") a.beta = true;
  else if (name == "mu") a.coupling = true;
  else if (name == "all") a.gamma = a.beta = a.coupling = true;
  else fail(ErrorKind::InvalidArgument, "unknown ablation component '" + name + "'");
  return a;
}

std::string layer_prefix(std::size_t layer) { return "layers." + std::to_string(layer) + "."; }

namespace {

const ad::Var& param(const VarMap& w, const std::string& name) {
  auto it = w.find(name);
  if (it == w.end()) fail(ErrorKind::InvalidArgument, "missing parameter '" + name + "'");
  return it->second;
}

ad::Var affine(const VarMap& w, const std::string& base, const std::string& wname, const std::string& bname,
               ad::Var x) {
  return ad::add(ad::matmul(x, param(w, base + wname)), param(w, base + bname));
}

ad::Var row_mlp(const VarMap& w, const std::string& base, ad::Var x) {
  return affine(w, base, "w2", "b2", ad::gelu(affine(w, base, "w1", "b1", x)));
}

ad::Var column_constant(ad::Tape& tape, const std::vector<double>& values) {
  return tape.constant(DenseMatrix::column(values));
}

}  // namespace

CoefficientVars coefficient_maps(const VarMap& w, const std::string& prefix, ad::Var xv, ad::Var xe) {
  CoefficientVars c;
  c.alpha_v = ad::offset(ad::softplus(row_mlp(w, prefix + "theta_alpha.node.", xv)), kAlphaFloor);
  c.beta_v = ad::softplus(row_mlp(w, prefix + "theta_beta.node.", xv));
  c.gamma_v = row_mlp(w, prefix + "theta_gamma.node.", xv);
  c.alpha_e = ad::offset(ad::softplus(row_mlp(w, prefix + "theta_alpha.edge.", xe)), kAlphaFloor);
  c.beta_e = ad::softplus(row_mlp(w, prefix + "theta_beta.edge.", xe));
  c.gamma_e = row_mlp(w, prefix + "theta_gamma.edge.", xe);
  return c;
}

Coefficients coefficient_maps(const FeatureMatrix& xv, const FeatureMatrix& xe, const ad::ParameterSet& params,
                              const std::string& prefix) {
  ad::Tape tape;
  VarMap w;
  for (const auto& [name, value] : params)
    if (name.rfind(prefix, 0) == 0) w.emplace(name, tape.constant(value));
  const CoefficientVars c = coefficient_maps(w, prefix, tape.constant(xv), tape.constant(xe));
  Coefficients out;
  out.alpha_v = c.alpha_v.value().col(0);
  out.beta_v = c.beta_v.value().col(0);
  out.gamma_v = c.gamma_v.value();
  out.alpha_e = c.alpha_e.value().col(0);
  out.beta_e = c.beta_e.value().col(0);
  out.gamma_e = c.gamma_e.value();
  return out;
}

namespace {

ad::Var side_forward(ad::Tape& tape, const ad::GatherPlan& fixed, const ad::GatherPlan& boundary,
                     const ad::GatherPlan& cross, const std::vector<double>& inner, ad::Var z_same, ad::Var z_other,
                     ad::Var alpha, ad::Var beta, ad::Var gamma, const LayerOptions& opt) {
  std::vector<double> outer(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) outer[i] = 1.0 - inner[i];
  const ad::Var inv_alpha = ad::reciprocal(alpha);
  // s_i = I_i + (1 - I_i) / alpha_i scales both cross-domain input and source.
  const ad::Var s = ad::add(ad::mul(inv_alpha, column_constant(tape, outer)), column_constant(tape, inner));
  ad::Var prop = ad::gather_sum(z_same, fixed);
  if (!opt.ablation.beta) prop = ad::add(prop, ad::mul(ad::gather_sum(z_same, boundary), ad::mul(beta, inv_alpha)));
  if (!opt.ablation.coupling) prop = ad::add(prop, ad::mul(ad::gather_sum(z_other, cross), s));
  ad::Var out = opt.identity_activation ? prop : ad::gelu(prop);
  if (!opt.ablation.gamma) out = ad::add(out, ad::mul(gamma, s));
  return out;
}

}  // namespace

std::pair<ad::Var, ad::Var> layer_forward(const LayerGraph& g, ad::Var xv, ad::Var xe, const VarMap& w,
                                          const std::string& prefix, const LayerOptions& opt) {
  require(xv.rows() == g.num_nodes && xe.rows() == g.num_edges, "layer input does not match the layer graph");
  ad::Tape& tape = *xv.tape;
  const CoefficientVars c = coefficient_maps(w, prefix, xv, xe);
  const ad::Var hv = ad::dropout(xv, opt.dropout, derive_key(opt.dropout_key, 0), opt.train);
  const ad::Var he = ad::dropout(xe, opt.dropout, derive_key(opt.dropout_key, 1), opt.train);
  const ad::Var zv = affine(w, prefix + "phi.node.", "w", "b", hv);
  const ad::Var ze = affine(w, prefix + "phi.edge.", "w", "b", he);
  ad::Var out_v = side_forward(tape, g.node_fixed, g.node_boundary, g.edge_to_node, g.node_inner, zv, ze, c.alpha_v,
                               c.beta_v, c.gamma_v, opt);
  ad::Var out_e = side_forward(tape, g.edge_fixed, g.edge_boundary, g.node_to_edge, g.edge_inner, ze, zv, c.alpha_e,
                               c.beta_e, c.gamma_e, opt);
  if (opt.layernorm) {
    out_v = ad::row_layernorm(out_v, param(w, prefix + "norm.node.gain"), param(w, prefix + "norm.node.bias"));
    out_e = ad::row_layernorm(out_e, param(w, prefix + "norm.edge.gain"), param(w, prefix + "norm.edge.bias"));
  }
  return {out_v, out_e};
}

ad::Var plain_layer_forward(const LayerGraph& g, ad::Var x, const VarMap& w, const std::string& prefix,
                            const LayerOptions& opt) {
  require(x.rows() == g.num_nodes, "layer input does not match the layer graph");
  const ad::Var h = ad::dropout(x, opt.dropout, derive_key(opt.dropout_key, 0), opt.train);
  const ad::Var prop = affine(w, prefix, "w", "b", ad::gather_sum(h, g.hgnn));
  return opt.identity_activation ? prop : ad::gelu(prop);
}

std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> layer_parameter_shapes(
    const std::string& prefix, std::size_t hidden) {
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> shapes;
  for (const char* map : {"theta_alpha", "theta_beta", "theta_gamma"})
    for (const char* side : {"node", "edge"}) {
      const std::string base = prefix + map + "." + side + ".";
      const std::size_t out = std::string(map) == "theta_gamma" ? hidden : 1;
      shapes.push_back({base + "w1", {hidden, hidden}});
      shapes.push_back({base + "b1", {1, hidden}});
      shapes.push_back({base + "w2", {hidden, out}});
      shapes.push_back({base + "b2", {1, out}});
    }
  for (const char* side : {"node", "edge"}) {
    shapes.push_back({prefix + "phi." + side + ".w", {hidden, hidden}});
    shapes.push_back({prefix + "phi." + side + ".b", {1, hidden}});
    shapes.push_back({prefix + "norm." + side + ".gain", {1, hidden}});
    shapes.push_back({prefix + "norm." + side + ".bias", {1, hidden}});
  }
  return shapes;
}

std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> plain_layer_parameter_shapes(
    const std::string& prefix, std::size_t hidden) {
  return {{prefix + "w", {hidden, hidden}}, {prefix + "b", {1, hidden}}};
}

}  // namespace heal
