#include "heal/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

#include "heal/error.hpp"
#include "heal/heatflow.hpp"
#include "heal/rng.hpp"
#include "heal/spectral.hpp"
#include "json.hpp"

namespace heal {

using nlohmann::json;

double accuracy(const DenseMatrix& logits, const std::vector<int>& labels, const std::vector<std::size_t>& rows) {
  if (rows.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r : rows) {
    auto z = logits.row(r);
    const auto best = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    hits += best == labels[r];
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

namespace {

double mean_cross_entropy(const DenseMatrix& logits, const std::vector<int>& labels,
                          const std::vector<std::size_t>& rows) {
  double total = 0.0;
  for (std::size_t r : rows) {
    auto z = logits.row(r);
    const double mx = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - mx);
    total += mx + std::log(s) - z[static_cast<std::size_t>(labels[r])];
  }
  return total / static_cast<double>(rows.size());
}

}  // namespace

TrainResult train_node_classifier(const NodeTask& task, const ModelSpec& spec, const TrainOptions& options) {
  require(!task.train.empty(), "training split is empty");
  const LayerGraph g =
      build_layer_graph(task.hypergraph, task.partition, spec.config.coupling_lambda, spec.config.coupling_mu);
  ad::ParameterSet params = init_parameters(spec);
  ad::Adam adam(spec.config.learning_rate, spec.config.weight_decay);
  TrainResult res;
  double best_val = -1.0;
  double best_loss = 0.0;
  ad::ParameterSet best = params;

  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    {
      ad::Tape tape;
      const VarMap w = bind_parameters(tape, params, true);
      const ForwardOutput out = model_forward(g, tape.constant(task.features), w, spec, true, epoch);
      const ad::Var loss = ad::softmax_cross_entropy(out.logits, task.labels, task.train);
      if (!std::isfinite(loss.value()(0, 0)))
        fail(ErrorKind::Numerical, "training loss became non-finite at epoch " + std::to_string(epoch));
      tape.backward(loss);
      ad::ParameterSet grads;
      for (const auto& [name, var] : w) grads.emplace(name, var.grad());
      adam.step(params, grads);
    }
    const DenseMatrix logits = model_logits(g, task.features, params, spec);
    res.epochs = epoch + 1;
    res.train_accuracy = accuracy(logits, task.labels, task.train);
    if (!task.val.empty()) {
      const double va = accuracy(logits, task.labels, task.val);
      const double vl = mean_cross_entropy(logits, task.labels, task.val);
      if (va > best_val || (va == best_val && vl < best_loss)) {
        best_val = va;
        best_loss = vl;
        res.val_accuracy = va;
        res.test_accuracy = accuracy(logits, task.labels, task.test);
        best = params;
      }
    } else {
      res.test_accuracy = accuracy(logits, task.labels, task.test);
      best = params;
    }
  }
  if (options.measure_energy) {
    ad::Tape tape;
    const VarMap w = bind_parameters(tape, best, false);
    const ForwardOutput out = model_forward(g, tape.constant(task.features), w, spec, false, 0);
    res.input_energy = dirichlet_energy(task.hypergraph, out.embedded.value());
    res.final_energy = dirichlet_energy(task.hypergraph, out.final_nodes.value());
  }
  res.params = std::move(best);
  return res;
}

NodeTask transfer_task(const std::string& topology, std::size_t n, std::size_t m, std::uint64_t seed,
                       std::size_t train_samples, std::size_t val_samples, std::size_t test_samples,
                       const std::string& partition_strategy) {
  require(train_samples > 0 && test_samples > 0, "transfer task needs train and test samples");
  const std::size_t total = train_samples + val_samples + test_samples;
  std::vector<TransferInstance> samples;
  for (std::size_t k = 0; k < total; ++k) samples.push_back(gen_transfer(topology, n, m, derive_key(seed, 0x7f, k)));
  const Hypergraph& base = samples.front().hypergraph;
  const std::size_t nv = base.num_nodes();
  NodeTask task;
  task.hypergraph = disjoint_union(base, total);
  task.partition = replicate_partition(base, choose_partition(base, partition_strategy, seed), total);
  task.features = FeatureMatrix(nv * total, kTransferFeatureDim);
  task.labels.assign(nv * total, 0);
  for (std::size_t k = 0; k < total; ++k) {
    const TransferInstance& t = samples[k];
    for (std::size_t v = 0; v < nv; ++v)
      for (std::size_t c = 0; c < kTransferFeatureDim; ++c) task.features(k * nv + v, c) = t.features(v, c);
    const std::size_t row = k * nv + t.target;
    task.labels[row] = t.label;
    auto& split = k < train_samples ? task.train : k < train_samples + val_samples ? task.val : task.test;
    split.push_back(row);
  }
  return task;
}

namespace {

NodeTask node_task(CsbmInstance c, const std::string& partition_strategy) {
  NodeTask task;
  task.partition = choose_partition(c.hypergraph, partition_strategy, c.params.seed);
  task.hypergraph = std::move(c.hypergraph);
  task.features = std::move(c.features);
  task.labels = std::move(c.labels);
  task.train = std::move(c.train);
  task.val = std::move(c.val);
  task.test = std::move(c.test);
  return task;
}

}  // namespace

NodeTask csbm_task(const CsbmParams& params, const std::string& partition_strategy) {
  return node_task(gen_csbm(params), partition_strategy);
}

NodeTask regular_task(const RegularParams& params, const std::string& partition_strategy) {
  return node_task(gen_regular_homophilic(params), partition_strategy);
}

std::size_t thread_budget() {
  std::size_t hw = std::max<unsigned>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HEAL_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) hw = std::min<std::size_t>(hw, static_cast<std::size_t>(cap));
  }
  return hw;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(thread_budget(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

const std::map<std::string, json>& defaults_table() {
  static const std::map<std::string, json> table = {
      {"transfer",
       {{"topology", "hes"}, {"n", 4}, {"m", 1}, {"seeds", 10}, {"seed", 0}, {"epochs", 200},
        {"models", "heal,plain"}, {"hidden_dim", 32}, {"layers", 0}, {"learning_rate", 0.01},
        {"weight_decay", 0.0}, {"dropout", 0.0}, {"train_samples", 128}, {"val_samples", 32}, {"test_samples", 64},
        {"partition", "spectral"}}},
      {"heterophily",
       {{"levels", "1..7"}, {"nodes", 500}, {"edges", 100}, {"seeds", 10}, {"seed", 0}, {"epochs", 100},
        {"models", "heal,plain"}, {"hidden_dim", 32}, {"n_layers", 2}, {"learning_rate", 0.01},
        {"weight_decay", 5e-4}, {"dropout", 0.5}, {"feature_dim", 16}, {"edge_size", 10},
        {"mean_separation", 1.0}, {"partition", "spectral"}}},
      {"depth",
       {{"layers", "1,2,4,8,16,32"}, {"models", "heal,plain"}, {"instance", "regular"}, {"nodes", 120},
        {"node_degree", 2}, {"edges", 30}, {"edge_size", 6}, {"level", 1}, {"seeds", 3}, {"seed", 0}, {"epochs", 100}, {"hidden_dim", 16}, {"learning_rate", 0.01},
        {"weight_decay", 5e-4}, {"dropout", 0.0}, {"feature_dim", 16}, {"mean_separation", 1.0},
        {"partition", "spectral"}}},
      {"ablation",
       {{"off", "gamma,beta,mu,all"}, {"nodes", 500}, {"edges", 100}, {"level", 6}, {"seeds", 10}, {"seed", 0},
        {"epochs", 100}, {"hidden_dim", 32}, {"n_layers", 2}, {"learning_rate", 0.01}, {"weight_decay", 5e-4},
        {"dropout", 0.5}, {"feature_dim", 16}, {"edge_size", 10}, {"mean_separation", 1.0},
        {"partition", "spectral"}}},
      {"spectrum", {{"input", ""}, {"laplacian", "node"}}},
      {"cheeger", {{"input", ""}}},
      {"diffuse",
       {{"input", ""}, {"laplacian", "node"}, {"bc", "none"}, {"alpha", 1.0}, {"beta", 1.0}, {"gamma", 0.0},
        {"dt", 0.1}, {"steps", 50}, {"seed", 0}, {"modes", 4}, {"subset", ""}, {"partition", "spectral"}}},
      {"generate",
       {{"topology", "hes"}, {"n", 4}, {"m", 1}, {"seed", 0}, {"level", 1}, {"nodes", 500}, {"edges", 100},
        {"edge_size", 10}, {"feature_dim", 16}, {"mean_separation", 1.0}, {"r", 3}, {"length", 6}, {"mouth", 2}}},
  };
  return table;
}

json merged_config(const std::string& command, const std::string& config_json) {
  const auto& table = defaults_table();
  auto it = table.find(command);
  if (it == table.end()) fail(ErrorKind::InvalidArgument, "unknown command '" + command + "'");
  json cfg = it->second;
  cfg["command"] = command;
  if (config_json.empty()) return cfg;
  json user;
  try {
    user = json::parse(config_json);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  if (!user.is_object()) fail(ErrorKind::InvalidArgument, "config must be a JSON object");
  for (const auto& [key, value] : user.items()) {
    if (key == "command") continue;
    if (!cfg.contains(key) && key != "output" && key != "summary" && key != "sidecar")
      fail(ErrorKind::InvalidArgument, "unknown config key '" + key + "' for command " + command);
    if (cfg.contains(key) && !cfg[key].is_null() && !value.is_null() &&
        (cfg[key].is_string() != value.is_string()))
      fail(ErrorKind::InvalidArgument, "config key '" + key + "' has the wrong type");
    cfg[key] = value;
  }
  return cfg;
}

template <typename T>
T get(const json& cfg, const char* key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::InvalidArgument, std::string("config key '") + key + "' has an invalid value");
  }
}

std::size_t get_count(const json& cfg, const char* key, std::size_t min_value) {
  const auto& v = cfg.at(key);
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min_value))
    fail(ErrorKind::InvalidArgument,
         std::string("config key '") + key + "' must be an integer >= " + std::to_string(min_value));
  return v.get<std::size_t>();
}

// Accepts a JSON array, "a,b,c", or "a..b".
std::vector<long long> get_int_list(const json& cfg, const char* key) {
  const json& v = cfg.at(key);
  std::vector<long long> out;
  if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_number_integer()) fail(ErrorKind::InvalidArgument, std::string("'") + key + "' must list integers");
      out.push_back(x.get<long long>());
    }
    return out;
  }
  if (v.is_number_integer()) return {v.get<long long>()};
  const std::string s = get<std::string>(cfg, key);
  std::stringstream ss(s);
  std::string tok;
  try {
    while (std::getline(ss, tok, ',')) {
      const auto dots = tok.find("..");
      std::size_t used = 0;
      if (dots != std::string::npos) {
        const long long a = std::stoll(tok.substr(0, dots));
        const long long b = std::stoll(tok.substr(dots + 2), &used);
        if (used != tok.size() - dots - 2 || b < a) throw std::invalid_argument(tok);
        for (long long x = a; x <= b; ++x) out.push_back(x);
      } else {
        out.push_back(std::stoll(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      }
    }
  } catch (const std::logic_error&) {
    fail(ErrorKind::InvalidArgument, std::string("cannot parse integer list '") + s + "' for " + key);
  }
  if (out.empty()) fail(ErrorKind::InvalidArgument, std::string("'") + key + "' is empty");
  return out;
}

std::vector<std::string> get_name_list(const json& cfg, const char* key) {
  std::vector<std::string> out;
  std::stringstream ss(get<std::string>(cfg, key));
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  if (out.empty()) fail(ErrorKind::InvalidArgument, std::string("'") + key + "' is empty");
  return out;
}

std::vector<ModelKind> get_models(const json& cfg) {
  std::vector<ModelKind> out;
  for (const auto& name : get_name_list(cfg, "models")) out.push_back(parse_model_kind(name));
  return out;
}

std::string csv_header(const json& cfg) { return "# config: " + cfg.dump() + "\n"; }

ModelConfig model_config(const json& cfg, std::size_t layers, std::uint64_t seed) {
  ModelConfig m;
  m.n_layers = layers;
  m.hidden_dim = get_count(cfg, "hidden_dim", 1);
  m.learning_rate = get<double>(cfg, "learning_rate");
  m.weight_decay = get<double>(cfg, "weight_decay");
  m.dropout = get<double>(cfg, "dropout");
  m.seed = seed;
  m.validate();
  return m;
}

CsbmParams csbm_params(const json& cfg, int level, std::uint64_t seed) {
  CsbmParams p;
  p.n_nodes = get_count(cfg, "nodes", 4);
  p.n_edges = get_count(cfg, "edges", 2);
  p.level = level;
  p.feature_dim = get_count(cfg, "feature_dim", 1);
  p.edge_size = get_count(cfg, "edge_size", 2);
  p.mean_separation = get<double>(cfg, "mean_separation");
  p.seed = seed;
  csbm_class0_proportion(level);
  return p;
}

struct Stats {
  double mean = 0.0;
  double std = 0.0;
};

Stats stats(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  for (double x : xs) s.std += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(xs.size()));
  return s;
}

CommandOutput cmd_transfer(const json& cfg) {
  const std::string topology = get<std::string>(cfg, "topology");
  if (topology != "hes" && topology != "hep" && topology != "her" && topology != "hed")
    fail(ErrorKind::InvalidArgument, "invalid topology '" + topology + "' (expected hes, hep, her or hed)");
  const std::size_t n = get_count(cfg, "n", 2);
  const std::size_t m = get_count(cfg, "m", 0);
  const std::size_t seeds = get_count(cfg, "seeds", 1);
  const std::uint64_t seed0 = get_count(cfg, "seed", 0);
  const std::size_t epochs = get_count(cfg, "epochs", 1);
  const auto models = get_models(cfg);
  const std::size_t train_samples = get_count(cfg, "train_samples", 1);
  const std::size_t val_samples = get_count(cfg, "val_samples", 0);
  const std::size_t test_samples = get_count(cfg, "test_samples", 1);
  const std::string partition = get<std::string>(cfg, "partition");
  const std::size_t depth = gen_transfer(topology, n, m, seed0).required_depth;
  const std::size_t layers_cfg = get_count(cfg, "layers", 0);
  const std::size_t layers = layers_cfg == 0 ? depth : layers_cfg;

  struct Row {
    std::size_t model;
    std::uint64_t seed;
    TrainResult r;
  };
  std::vector<Row> rows(seeds * models.size());
  parallel_for(rows.size(), [&](std::size_t k) {
    const std::size_t mi = k % models.size();
    const std::uint64_t s = seed0 + k / models.size();
    const NodeTask task = transfer_task(topology, n, m, s, train_samples, val_samples, test_samples, partition);
    ModelSpec spec;
    spec.kind = models[mi];
    spec.input_dim = kTransferFeatureDim;
    spec.num_classes = 2;
    spec.config = model_config(cfg, layers, s);
    TrainOptions opt;
    opt.max_epochs = epochs;
    rows[k] = {mi, s, train_node_classifier(task, spec, opt)};
  });
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return std::tie(a.model, a.seed) < std::tie(b.model, b.seed); });

  std::ostringstream out;
  out << csv_header(cfg) << "# required_depth=" << depth << " layers=" << layers << "\n";
  out << "topology,model,seed,accuracy,train_accuracy,epochs\n";
  json summary = {{"config", cfg}, {"required_depth", depth}, {"layers", layers}};
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    std::vector<double> accs;
    for (const Row& r : rows) {
      if (r.model != mi) continue;
      out << topology << ',' << to_string(models[mi]) << ',' << r.seed << ',' << format_double(r.r.test_accuracy)
          << ',' << format_double(r.r.train_accuracy) << ',' << r.r.epochs << '\n';
      accs.push_back(r.r.test_accuracy);
    }
    const Stats st = stats(accs);
    out << topology << ',' << to_string(models[mi]) << ",mean," << format_double(st.mean) << ",,\n";
    out << topology << ',' << to_string(models[mi]) << ",std," << format_double(st.std) << ",,\n";
    summary["models"][to_string(models[mi])] = {{"mean", st.mean}, {"std", st.std}, {"accuracy", accs}};
  }
  return {out.str(), summary.dump()};
}

CommandOutput cmd_heterophily(const json& cfg) {
  const auto levels = get_int_list(cfg, "levels");
  for (long long l : levels)
    if (l < 1 || l > 7) fail(ErrorKind::Range, "heterophily level " + std::to_string(l) + " outside 1..7");
  const std::size_t seeds = get_count(cfg, "seeds", 1);
  const std::uint64_t seed0 = get_count(cfg, "seed", 0);
  const std::size_t epochs = get_count(cfg, "epochs", 1);
  const std::size_t layers = get_count(cfg, "n_layers", 0);
  const auto models = get_models(cfg);
  const std::string partition = get<std::string>(cfg, "partition");
  for (long long l : levels) csbm_params(cfg, static_cast<int>(l), seed0);

  struct Row {
    long long level;
    std::size_t model;
    std::uint64_t seed;
    double acc;
  };
  const std::size_t per_level = seeds * models.size();
  std::vector<Row> rows(levels.size() * per_level);
  parallel_for(rows.size(), [&](std::size_t k) {
    const long long level = levels[k / per_level];
    const std::size_t rest = k % per_level;
    const std::size_t mi = rest % models.size();
    const std::uint64_t s = seed0 + rest / models.size();
    const NodeTask task = csbm_task(csbm_params(cfg, static_cast<int>(level), s), partition);
    ModelSpec spec;
    spec.kind = models[mi];
    spec.input_dim = task.features.cols();
    spec.config = model_config(cfg, layers, s);
    TrainOptions opt;
    opt.max_epochs = epochs;
    rows[k] = {level, mi, s, train_node_classifier(task, spec, opt).test_accuracy};
  });
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.level, a.model, a.seed) < std::tie(b.level, b.model, b.seed);
  });
  std::ostringstream out;
  out << csv_header(cfg) << "level,model,seed,accuracy\n";
  json summary = {{"config", cfg}};
  for (std::size_t i = 0; i < rows.size(); i += seeds) {
    std::vector<double> accs;
    for (std::size_t j = i; j < i + seeds; ++j) {
      out << rows[j].level << ',' << to_string(models[rows[j].model]) << ',' << rows[j].seed << ','
          << format_double(rows[j].acc) << '\n';
      accs.push_back(rows[j].acc);
    }
    const Stats st = stats(accs);
    out << rows[i].level << ',' << to_string(models[rows[i].model]) << ",mean," << format_double(st.mean) << '\n';
    summary["mean"][to_string(models[rows[i].model])][std::to_string(rows[i].level)] = st.mean;
  }
  return {out.str(), summary.dump()};
}

CommandOutput cmd_depth(const json& cfg) {
  const auto depths = get_int_list(cfg, "layers");
  for (long long d : depths)
    if (d <= 0) fail(ErrorKind::InvalidArgument, "depth entries must be positive, got " + std::to_string(d));
  const auto models = get_models(cfg);
  const std::size_t seeds = get_count(cfg, "seeds", 1);
  const std::uint64_t seed0 = get_count(cfg, "seed", 0);
  const std::size_t epochs = get_count(cfg, "epochs", 1);
  const std::string instance = get<std::string>(cfg, "instance");
  if (instance != "regular" && instance != "csbm")
    fail(ErrorKind::InvalidArgument, "instance must be regular or csbm, got '" + instance + "'");
  const std::string partition = get<std::string>(cfg, "partition");
  auto make_task = [&](std::uint64_t s) {
    if (instance == "csbm") return csbm_task(csbm_params(cfg, get<int>(cfg, "level"), s), partition);
    RegularParams rp;
    rp.n_nodes = get_count(cfg, "nodes", 4);
    rp.node_degree = get_count(cfg, "node_degree", 1);
    rp.edge_size = get_count(cfg, "edge_size", 2);
    rp.feature_dim = get_count(cfg, "feature_dim", 1);
    rp.mean_separation = get<double>(cfg, "mean_separation");
    rp.seed = s;
    return regular_task(rp, partition);
  };
  make_task(seed0);

  struct Row {
    long long depth;
    std::size_t model;
    std::uint64_t seed;
    TrainResult r;
  };
  const std::size_t per_depth = seeds * models.size();
  std::vector<Row> rows(depths.size() * per_depth);
  parallel_for(rows.size(), [&](std::size_t k) {
    const long long depth = depths[k / per_depth];
    const std::size_t rest = k % per_depth;
    const std::size_t mi = rest % models.size();
    const std::uint64_t s = seed0 + rest / models.size();
    const NodeTask task = make_task(s);
    ModelSpec spec;
    spec.kind = models[mi];
    spec.input_dim = task.features.cols();
    spec.config = model_config(cfg, static_cast<std::size_t>(depth), s);
    TrainOptions opt;
    opt.max_epochs = epochs;
    opt.measure_energy = true;
    rows[k] = {depth, mi, s, train_node_classifier(task, spec, opt)};
    rows[k].r.params.clear();
  });
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.depth, a.model, a.seed) < std::tie(b.depth, b.model, b.seed);
  });
  std::ostringstream out;
  out << csv_header(cfg) << "depth,model,seed,accuracy,input_energy,final_energy,energy_ratio\n";
  json summary = {{"config", cfg}};
  for (const Row& r : rows) {
    const double ratio = r.r.input_energy > 0 ? r.r.final_energy / r.r.input_energy : 0.0;
    out << r.depth << ',' << to_string(models[r.model]) << ',' << r.seed << ',' << format_double(r.r.test_accuracy)
        << ',' << format_double(r.r.input_energy) << ',' << format_double(r.r.final_energy) << ','
        << format_double(ratio) << '\n';
    summary["runs"].push_back({{"depth", r.depth},
                               {"model", to_string(models[r.model])},
                               {"seed", r.seed},
                               {"accuracy", r.r.test_accuracy},
                               {"energy_ratio", ratio}});
  }
  return {out.str(), summary.dump()};
}

// Largest deviation between the propagation with every exchanger term off
// and the plain operator masked by (I_i I_j + I_i).
double ablation_structure_gap(const NodeTask& task) {
  const LayerGraph g = build_layer_graph(task.hypergraph, task.partition);
  const std::size_t n = g.num_nodes;
  DenseMatrix eye = DenseMatrix::identity(n);
  const DenseMatrix fixed = g.node_fixed.apply(eye);
  const DenseMatrix plain = g.hgnn.apply(eye);
  double gap = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double mask = g.node_inner[i] * g.node_inner[j] + g.node_inner[i];
      gap = std::max(gap, std::abs(fixed(i, j) - plain(i, j) * mask));
    }
  return gap;
}

CommandOutput cmd_ablation(const json& cfg) {
  std::vector<std::string> variants{"full"};
  for (const auto& name : get_name_list(cfg, "off")) {
    parse_ablation(name);
    if (std::find(variants.begin(), variants.end(), name) == variants.end()) variants.push_back(name);
  }
  const std::size_t seeds = get_count(cfg, "seeds", 1);
  const std::uint64_t seed0 = get_count(cfg, "seed", 0);
  const std::size_t epochs = get_count(cfg, "epochs", 1);
  const std::size_t layers = get_count(cfg, "n_layers", 0);
  const int level = get<int>(cfg, "level");
  const std::string partition = get<std::string>(cfg, "partition");
  csbm_params(cfg, level, seed0);

  std::vector<double> acc(variants.size() * seeds);
  parallel_for(acc.size(), [&](std::size_t k) {
    const std::size_t vi = k / seeds;
    const std::uint64_t s = seed0 + k % seeds;
    const NodeTask task = csbm_task(csbm_params(cfg, level, s), partition);
    ModelSpec spec;
    spec.input_dim = task.features.cols();
    spec.config = model_config(cfg, layers, s);
    spec.ablation = variants[vi] == "full" ? Ablation{} : parse_ablation(variants[vi]);
    TrainOptions opt;
    opt.max_epochs = epochs;
    acc[k] = train_node_classifier(task, spec, opt).test_accuracy;
  });
  std::ostringstream out;
  out << csv_header(cfg);
  json summary = {{"config", cfg}};
  if (std::find(variants.begin(), variants.end(), "all") != variants.end()) {
    const double gap = ablation_structure_gap(csbm_task(csbm_params(cfg, level, seed0), partition));
    out << "# structural: with gamma, beta and coupling off the node propagation equals the plain operator "
           "masked by (I_i I_j + I_i); max deviation "
        << format_double(gap) << "\n";
    summary["structural_max_deviation"] = gap;
  }
  out << "variant,seed,accuracy\n";
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    std::vector<double> xs(acc.begin() + static_cast<std::ptrdiff_t>(vi * seeds),
                           acc.begin() + static_cast<std::ptrdiff_t>((vi + 1) * seeds));
    for (std::size_t s = 0; s < seeds; ++s)
      out << variants[vi] << ',' << seed0 + s << ',' << format_double(xs[s]) << '\n';
    const Stats st = stats(xs);
    out << variants[vi] << ",mean," << format_double(st.mean) << '\n';
    summary["mean"][variants[vi]] = st.mean;
  }
  return {out.str(), summary.dump()};
}

Hypergraph input_hypergraph(const json& cfg) {
  const std::string path = get<std::string>(cfg, "input");
  if (path.empty()) fail(ErrorKind::InvalidArgument, "an input hypergraph file is required");
  return load_hypergraph(path);
}

DenseMatrix chosen_laplacian(const Hypergraph& h, const json& cfg) {
  const std::string kind = get<std::string>(cfg, "laplacian");
  if (kind == "node") return node_laplacian(h);
  if (kind == "edge") return edge_laplacian(h);
  fail(ErrorKind::InvalidArgument, "laplacian must be node or edge, got '" + kind + "'");
}

CommandOutput cmd_spectrum(const json& cfg) {
  const Hypergraph h = input_hypergraph(cfg);
  const auto d = eig_sym(chosen_laplacian(h, cfg));
  std::ostringstream out;
  out << csv_header(cfg) << "index,eigenvalue\n";
  for (std::size_t i = 0; i < d.eigenvalues.size(); ++i) out << i << ',' << format_double(d.eigenvalues[i]) << '\n';
  json summary = {{"config", cfg}, {"lambda_max", d.eigenvalues.back()}};
  try {
    const GapReport g = gap_report(d);
    summary["lambda1"] = g.value;
    summary["zero_multiplicity"] = g.zero_multiplicity;
    summary["disconnected"] = g.disconnected();
  } catch (const HealError&) {
    summary["lambda1"] = nullptr;
  }
  return {out.str(), summary.dump()};
}

CommandOutput cmd_cheeger(const json& cfg) {
  const Hypergraph h = input_hypergraph(cfg);
  const auto d = eig_sym(node_laplacian(h));
  const GapReport gap = gap_report(d);
  json j = {{"config", cfg}, {"lambda1", gap.value}};
  CheegerResult c;
  if (h.num_nodes() > kCheegerExactLimit) {
    c = cheeger_sweep(h, d.eigenvectors.col(gap.index));
    j["upper_bound_only"] = true;
    j["method"] = "sweep";
  } else {
    c = cheeger_exact(h);
    j["method"] = "exact";
  }
  j["phi"] = c.phi;
  j["subset"] = c.argmin_subset;
  j["subsets_examined"] = c.subsets_examined;
  const std::size_t r = h.uniform_rank();
  if (r >= 2) {
    const double rm1 = static_cast<double>(r - 1);
    const double lower = c.phi * c.phi / (2.0 * rm1 * rm1);
    const double upper = 2.0 * c.phi / rm1;
    j["r"] = r;
    j["lower_bound"] = lower;
    j["upper_bound"] = upper;
    if (h.num_nodes() <= kCheegerExactLimit)
      j["holds"] = lower <= gap.value + 1e-9 && gap.value <= upper + 1e-9;
    else
      j["reason"] = "phi is a sweep upper bound, so the inequality is not decided";
  } else {
    j["reason"] = "hypergraph is not uniform; the inequality applies to r-uniform inputs only";
  }
  return {j.dump(1) + "\n", ""};
}

std::vector<std::size_t> parse_subset(const json& cfg, const Hypergraph& h) {
  const std::string s = get<std::string>(cfg, "subset");
  std::vector<std::size_t> out;
  if (s.empty()) return out;
  for (long long v : get_int_list(cfg, "subset")) {
    if (v < 0 || static_cast<std::size_t>(v) >= h.num_nodes())
      fail(ErrorKind::Range, "subset node " + std::to_string(v) + " out of range");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

CommandOutput cmd_diffuse(const json& cfg) {
  const Hypergraph h = input_hypergraph(cfg);
  const std::string bc = get<std::string>(cfg, "bc");
  const double dt = get<double>(cfg, "dt");
  const std::size_t steps = get_count(cfg, "steps", 0);
  const std::uint64_t seed = get_count(cfg, "seed", 0);
  const std::size_t want_modes = get_count(cfg, "modes", 0);
  if (!(dt > 0)) fail(ErrorKind::InvalidArgument, "dt must be positive");
  CounterRng rng(seed, 0xd1ffULL);
  std::ostringstream out;
  out << csv_header(cfg);
  json summary = {{"config", cfg}};

  if (bc == "none") {
    const DenseMatrix L = chosen_laplacian(h, cfg);
    FeatureMatrix z(L.rows(), 1);
    for (double& v : z.values()) v = rng.normal();
    const auto modes = eig_sym(L);
    const std::size_t k = std::min(want_modes, L.rows());
    const DiffusionTrace tr = diffuse_with_source(L, z, {}, dt, steps, {&modes, k, 0});
    const double lambda1 = spectral_gap(modes);
    out << "t,energy,bound";
    for (std::size_t i = 0; i < k; ++i) out << ",mode_" << i;
    out << '\n';
    bool holds = true;
    for (std::size_t r = 0; r < tr.times.size(); ++r) {
      const double bound = std::exp(-2.0 * lambda1 * tr.times[r]) * tr.energies.front();
      holds = holds && tr.energies[r] <= bound * (1 + 1e-9) + 1e-300;
      out << format_double(tr.times[r]) << ',' << format_double(tr.energies[r]) << ',' << format_double(bound);
      for (std::size_t i = 0; i < k; ++i) out << ',' << format_double((*tr.mode_amplitudes)(r, i));
      out << '\n';
    }
    summary["lambda1"] = lambda1;
    summary["bound_holds"] = holds;
    summary["warnings"] = tr.warnings;
    return {out.str(), summary.dump()};
  }

  if (get<std::string>(cfg, "laplacian") != "node")
    fail(ErrorKind::InvalidArgument, "boundary conditions are defined on the node laplacian only");
  const BoundaryKind kind = parse_boundary_kind(bc);
  const auto subset = parse_subset(cfg, h);
  const Partition p = subset.empty() ? choose_partition(h, get<std::string>(cfg, "partition"), seed)
                                     : derive_partition(h, subset);
  if (p.interior_nodes.empty()) fail(ErrorKind::InvalidArgument, "partition has no interior nodes");
  const std::size_t nb = p.boundary_nodes.size();
  DenseMatrix gamma(nb, 1, get<double>(cfg, "gamma"));
  BoundarySpec spec;
  if (kind == BoundaryKind::Dirichlet) spec = BoundarySpec::dirichlet(nb, gamma);
  else if (kind == BoundaryKind::Neumann) spec = BoundarySpec::neumann(nb, gamma);
  else
    spec = BoundarySpec::robin(std::vector<double>(nb, get<double>(cfg, "alpha")),
                               std::vector<double>(nb, get<double>(cfg, "beta")), gamma);
  const auto order = p.subset_order();
  FeatureMatrix z(order.size(), 1);
  for (double& v : z.values()) v = rng.normal();
  const DiffusionTrace tr = boundary_conditioned_diffuse(h, p, spec, z, dt, steps);
  const DenseMatrix Ls = node_laplacian(h).submatrix(order, order);
  const auto modes = eig_sym(Ls);
  const std::size_t k = std::min(want_modes, order.size());
  out << "# subset order:";
  for (std::size_t v : order) out << ' ' << v;
  out << "\nt,energy";
  for (std::size_t i = 0; i < k; ++i) out << ",mode_" << i;
  for (std::size_t v : p.boundary_nodes) out << ",boundary_" << v;
  out << '\n';
  for (std::size_t r = 0; r < tr.times.size(); ++r) {
    const FeatureMatrix& u = tr.states[r];
    out << format_double(tr.times[r]) << ',' << format_double(tr.energies[r]);
    for (std::size_t i = 0; i < k; ++i) {
      double a = 0.0;
      for (std::size_t v = 0; v < order.size(); ++v) a += modes.eigenvectors(v, i) * u(v, 0);
      out << ',' << format_double(a);
    }
    for (std::size_t b = 0; b < nb; ++b) out << ',' << format_double(u(p.interior_nodes.size() + b, 0));
    out << '\n';
  }
  summary["interior"] = p.interior_nodes;
  summary["boundary"] = p.boundary_nodes;
  summary["warnings"] = tr.warnings;
  return {out.str(), summary.dump()};
}

CommandOutput cmd_generate(const json& cfg) {
  const std::string topology = get<std::string>(cfg, "topology");
  const std::uint64_t seed = get_count(cfg, "seed", 0);
  json side;
  Hypergraph h;
  if (topology == "csbm") {
    const CsbmInstance c = gen_csbm(csbm_params(cfg, get<int>(cfg, "level"), seed));
    h = c.hypergraph;
    side = json::parse(csbm_sidecar_json(c));
  } else if (topology == "uniform") {
    h = gen_random_uniform(get_count(cfg, "nodes", 2), get_count(cfg, "edges", 1), get_count(cfg, "r", 2), seed);
    side = {{"topology", "uniform"}, {"r", get_count(cfg, "r", 2)}, {"seed", seed}};
  } else if (topology == "tube") {
    const TubeInstance t = gen_tube(get_count(cfg, "length", 3), get_count(cfg, "mouth", 1));
    h = t.hypergraph;
    side = {{"topology", "tube"}, {"subset", t.subset}};
  } else {
    const TransferInstance t = gen_transfer(topology, get_count(cfg, "n", 2), get_count(cfg, "m", 0), seed);
    h = t.hypergraph;
    side = json::parse(transfer_sidecar_json(t));
  }
  side["config"] = cfg;
  return {format_hypergraph(h), side.dump(1) + "\n"};
}

}  // namespace

std::string command_defaults(const std::string& command) { return merged_config(command, "").dump(1); }

CommandOutput run_command(const std::string& command, const std::string& config_json) {
  const json cfg = merged_config(command, config_json);
  if (command == "transfer") return cmd_transfer(cfg);
  if (command == "heterophily") return cmd_heterophily(cfg);
  if (command == "depth") return cmd_depth(cfg);
  if (command == "ablation") return cmd_ablation(cfg);
  if (command == "spectrum") return cmd_spectrum(cfg);
  if (command == "cheeger") return cmd_cheeger(cfg);
  if (command == "diffuse") return cmd_diffuse(cfg);
  if (command == "generate") return cmd_generate(cfg);
  fail(ErrorKind::InvalidArgument, "unknown command '" + command + "'");
}

}  // namespace heal
