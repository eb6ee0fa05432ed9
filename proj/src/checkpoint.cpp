#include <fstream>
#include <sstream>

#include "heal/error.hpp"
#include "heal/model.hpp"
#include "json.hpp"

namespace heal {

using nlohmann::json;

namespace {

constexpr int kCheckpointVersion = 1;

json config_json(const ModelSpec& s) {
  const ModelConfig& c = s.config;
  return {{"kind", to_string(s.kind)},
          {"input_dim", s.input_dim},
          {"num_classes", s.num_classes},
          {"layernorm", s.layernorm},
          {"ablation", {{"gamma", s.ablation.gamma}, {"beta", s.ablation.beta}, {"coupling", s.ablation.coupling}}},
          {"n_layers", c.n_layers},
          {"hidden_dim", c.hidden_dim},
          {"dropout", c.dropout},
          {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"tau", c.tau},
          {"coupling_lambda", c.coupling_lambda},
          {"coupling_mu", c.coupling_mu},
          {"seed", c.seed}};
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& c) {
  json params = json::object();
  for (const auto& [name, m] : c.params)
    params[name] = {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.values()}};
  json doc = {{"format", "heal-checkpoint"}, {"version", kCheckpointVersion}, {"config", config_json(c.spec)},
              {"parameters", params}};
  return doc.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  Checkpoint c;
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "heal-checkpoint") fail(ErrorKind::InvalidArgument, "not a checkpoint document");
    if (doc.at("version").get<int>() != kCheckpointVersion)
      fail(ErrorKind::InvalidArgument, "unsupported checkpoint version");
    const json& cfg = doc.at("config");
    c.spec.kind = parse_model_kind(cfg.at("kind").get<std::string>());
    c.spec.input_dim = cfg.at("input_dim").get<std::size_t>();
    c.spec.num_classes = cfg.at("num_classes").get<std::size_t>();
    c.spec.layernorm = cfg.at("layernorm").get<bool>();
    c.spec.ablation.gamma = cfg.at("ablation").at("gamma").get<bool>();
    c.spec.ablation.beta = cfg.at("ablation").at("beta").get<bool>();
    c.spec.ablation.coupling = cfg.at("ablation").at("coupling").get<bool>();
    ModelConfig& m = c.spec.config;
    m.n_layers = cfg.at("n_layers").get<std::size_t>();
    m.hidden_dim = cfg.at("hidden_dim").get<std::size_t>();
    m.dropout = cfg.at("dropout").get<double>();
    m.learning_rate = cfg.at("learning_rate").get<double>();
    m.weight_decay = cfg.at("weight_decay").get<double>();
    m.tau = cfg.at("tau").get<double>();
    m.coupling_lambda = cfg.at("coupling_lambda").get<double>();
    m.coupling_mu = cfg.at("coupling_mu").get<double>();
    m.seed = cfg.at("seed").get<std::uint64_t>();
    for (const auto& [name, t] : doc.at("parameters").items()) {
      DenseMatrix w(t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>());
      const auto data = t.at("data").get<std::vector<double>>();
      if (data.size() != w.size()) fail(ErrorKind::InvalidArgument, "tensor '" + name + "' has the wrong size");
      w.values() = data;
      c.params.emplace(name, std::move(w));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("malformed checkpoint: ") + e.what());
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(c);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open checkpoint '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace heal
