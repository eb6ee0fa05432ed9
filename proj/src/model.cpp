#include <cmath>
#include <map>
#include <string>

#include "heal/error.hpp"
#include "heal/model.hpp"
#include "heal/rng.hpp"
#include "heal/spectral.hpp"

namespace heal {

void ModelConfig::validate() const {
  require(hidden_dim > 0, "hidden_dim must be positive");
  require(dropout >= 0 && dropout < 1, "dropout must lie in [0, 1)");
  require(learning_rate > 0, "learning_rate must be positive");
  require(weight_decay >= 0, "weight_decay must be nonnegative");
}

namespace {

struct TableRow {
  const char* name;
  std::size_t layers;
  std::size_t hidden;
  double tau;
  double dropout;
  double lr;
  double wd;
};

constexpr TableRow kTable[] = {
    {"cora-ca", 3, 128, 0.001, 0.7, 5e-5, 5e-7},  {"dblp-ca", 5, 128, 0.01, 0.7, 1e-3, 0.0},
    {"citeseer", 3, 512, 0.1, 0.8, 5e-3, 5e-5},   {"pubmed", 3, 64, 0.5, 0.6, 5e-3, 5e-5},
    {"congress", 5, 512, 0.1, 0.35, 5e-3, 0.0},   {"house", 5, 512, 0.5, 0.35, 3e-4, 0.0},
    {"senate", 5, 512, 0.5, 0.35, 3e-4, 0.0},     {"ntu2012", 3, 512, 0.5, 0.3, 3e-5, 0.0},
    {"walmart", 5, 256, 0.5, 0.35, 3e-4, 0.0},
};

}  // namespace

ModelConfig dataset_defaults(const std::string& dataset) {
  for (const auto& row : kTable)
    if (dataset == row.name) {
      ModelConfig c;
      c.n_layers = row.layers;
      c.hidden_dim = row.hidden;
      c.tau = row.tau;
      c.dropout = row.dropout;
      c.learning_rate = row.lr;
      c.weight_decay = row.wd;
      return c;
    }
  fail(ErrorKind::InvalidArgument, "no defaults for dataset '" + dataset + "'");
}

std::vector<std::string> dataset_names() {
  std::vector<std::string> out;
  for (const auto& row : kTable) out.emplace_back(row.name);
  return out;
}

std::string to_string(ModelKind kind) { return kind == ModelKind::Heal ? "heal" : "plain"; }

ModelKind parse_model_kind(const std::string& name) {
  if (name == "heal") return ModelKind::Heal;
  if (name == "plain") return ModelKind::Plain;
  fail(ErrorKind::InvalidArgument, "unknown model '" + name + "'");
}

ad::ParameterSet init_parameters(const ModelSpec& spec) {
  spec.config.validate();
  require(spec.input_dim > 0 && spec.num_classes > 0, "model needs input and class dimensions");
  const std::size_t h = spec.config.hidden_dim;
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> shapes;
  shapes.push_back({"input.w", {spec.input_dim, h}});
  shapes.push_back({"input.b", {1, h}});
  for (std::size_t k = 0; k < spec.config.n_layers; ++k) {
    auto layer = spec.kind == ModelKind::Heal ? layer_parameter_shapes(layer_prefix(k), h)
                                              : plain_layer_parameter_shapes(layer_prefix(k), h);
    shapes.insert(shapes.end(), layer.begin(), layer.end());
  }
  shapes.push_back({"head.w", {h, spec.num_classes}});
  shapes.push_back({"head.b", {1, spec.num_classes}});

  ad::ParameterSet params;
  for (const auto& [name, shape] : shapes) {
    DenseMatrix m(shape.first, shape.second);
    const bool is_bias = name.ends_with(".b") || name.ends_with(".b1") || name.ends_with(".b2") ||
                         name.ends_with(".bias");
    if (name.ends_with(".gain")) {
      for (double& v : m.values()) v = 1.0;
    } else if (!is_bias) {
      // Glorot uniform; each tensor draws from its own named stream.
      std::uint64_t name_hash = 1469598103934665603ULL;
      for (char ch : name) name_hash = (name_hash ^ static_cast<unsigned char>(ch)) * 1099511628211ULL;
      CounterRng rng(spec.config.seed, 0x1a17ULL, name_hash);
      const double limit = std::sqrt(6.0 / static_cast<double>(shape.first + shape.second));
      for (double& v : m.values()) v = rng.uniform(-limit, limit);
    }
    params.emplace(name, std::move(m));
  }
  return params;
}

VarMap bind_parameters(ad::Tape& tape, const ad::ParameterSet& params, bool trainable) {
  VarMap w;
  for (const auto& [name, value] : params) w.emplace(name, trainable ? tape.leaf(value) : tape.constant(value));
  return w;
}

ForwardOutput model_forward(const LayerGraph& g, ad::Var x_in, const VarMap& w, const ModelSpec& spec, bool train,
                            std::uint64_t step) {
  require(x_in.rows() == g.num_nodes, "input features do not match the hypergraph");
  require(x_in.cols() == spec.input_dim, "input feature width does not match the model");
  auto get = [&](const std::string& name) {
    auto it = w.find(name);
    if (it == w.end()) fail(ErrorKind::InvalidArgument, "missing parameter '" + name + "'");
    return it->second;
  };
  ForwardOutput out;
  out.embedded = ad::add(ad::matmul(x_in, get("input.w")), get("input.b"));
  ad::Var xv = out.embedded;
  ad::Var xe = ad::gather_sum(xv, g.edge_mean);
  for (std::size_t k = 0; k < spec.config.n_layers; ++k) {
    LayerOptions opt;
    opt.train = train;
    opt.dropout = spec.config.dropout;
    opt.dropout_key = derive_key(spec.config.seed, 0xd50ULL, k, step);
    opt.layernorm = spec.layernorm;
    opt.ablation = spec.ablation;
    if (spec.kind == ModelKind::Heal) {
      std::tie(xv, xe) = layer_forward(g, xv, xe, w, layer_prefix(k), opt);
    } else {
      xv = plain_layer_forward(g, xv, w, layer_prefix(k), opt);
    }
  }
  out.final_nodes = xv;
  out.logits = ad::add(ad::matmul(xv, get("head.w")), get("head.b"));
  return out;
}

DenseMatrix model_logits(const LayerGraph& g, const FeatureMatrix& x_in, const ad::ParameterSet& params,
                         const ModelSpec& spec) {
  ad::Tape tape;
  const VarMap w = bind_parameters(tape, params, false);
  return model_forward(g, tape.constant(x_in), w, spec, false, 0).logits.value();
}

Partition choose_partition(const Hypergraph& h, const std::string& strategy, std::uint64_t /*seed*/,
                           std::span<const std::size_t> file_nodes) {
  if (strategy == "all-interior") {
    std::vector<std::size_t> all(h.num_nodes());
    for (std::size_t v = 0; v < all.size(); ++v) all[v] = v;
    return derive_partition(h, all);
  }
  if (strategy == "file") {
    require(!file_nodes.empty(), "file partition strategy needs a node set");
    return derive_partition(h, file_nodes);
  }
  if (strategy == "spectral") {
    require(h.is_connected(), "spectral partition needs a connected hypergraph");
    std::vector<double> fiedler;
    // Dense decomposition is exact; the power iteration keeps large inputs fast.
    if (h.num_nodes() <= 200) {
      const auto d = eig_sym(node_laplacian(h));
      fiedler = d.eigenvectors.col(gap_report(d).index);
    } else {
      fiedler = fiedler_vector(h);
    }
    return derive_partition(h, cheeger_sweep(h, fiedler).argmin_subset);
  }
  fail(ErrorKind::InvalidArgument, "unknown partition strategy '" + strategy + "'");
}

}  // namespace heal
