#include <gtest/gtest.h>

#include <atomic>
#include <fstream>

#include "heal/error.hpp"
#include "heal/experiments.hpp"
#include "json.hpp"

using namespace heal;
using nlohmann::json;

namespace {

ErrorKind kind_of(const std::string& command, const json& cfg) {
  try {
    run_command(command, cfg.dump());
  } catch (const HealError& e) {
    return e.kind();
  }
  ADD_FAILURE() << command << " did not throw";
  return ErrorKind::Io;
}

}  // namespace

TEST(Experiments, AccuracyCountsArgmax) {
  const DenseMatrix logits{{2, 1}, {0, 3}, {1, 0}};
  EXPECT_DOUBLE_EQ(accuracy(logits, {0, 1, 1}, {0, 1, 2}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(accuracy(logits, {0, 1, 1}, {0, 1}), 1.0);
}

TEST(Experiments, TransferTaskLabelsOnlyTargets) {
  const NodeTask t = transfer_task("hes", 4, 1, 0, 3, 2, 2, "spectral");
  EXPECT_EQ(t.train.size(), 3u);
  EXPECT_EQ(t.val.size(), 2u);
  EXPECT_EQ(t.test.size(), 2u);
  EXPECT_EQ(t.hypergraph.num_nodes(), 7 * gen_hes(4, 0).hypergraph.num_nodes());
}

TEST(Experiments, TrainingLearnsSeparableTask) {
  CsbmParams p;
  p.n_nodes = 80;
  p.n_edges = 16;
  p.edge_size = 5;
  p.mean_separation = 3.0;
  const NodeTask task = csbm_task(p, "spectral");
  ModelSpec spec;
  spec.input_dim = task.features.cols();
  spec.config.hidden_dim = 8;
  spec.config.dropout = 0.0;
  spec.config.learning_rate = 0.02;
  TrainOptions opt;
  opt.max_epochs = 40;
  const TrainResult a = train_node_classifier(task, spec, opt);
  const TrainResult b = train_node_classifier(task, spec, opt);
  EXPECT_GT(a.test_accuracy, 0.8);
  EXPECT_EQ(a.test_accuracy, b.test_accuracy);
}

TEST(Experiments, ParallelForVisitsEveryIndex) {
  std::vector<std::atomic<int>> seen(37);
  parallel_for(seen.size(), [&](std::size_t i) { seen[i]++; });
  for (const auto& s : seen) EXPECT_EQ(s.load(), 1);
  EXPECT_GE(thread_budget(), 1u);
}

TEST(Experiments, DefaultsAreJsonObjects) {
  for (const char* c : {"transfer", "heterophily", "depth", "ablation", "spectrum", "cheeger", "diffuse", "generate"})
    EXPECT_TRUE(json::parse(command_defaults(c)).is_object()) << c;
  EXPECT_THROW(command_defaults("train"), HealError);
}

TEST(Experiments, ConfigErrors) {
  EXPECT_EQ(kind_of("heterophily", {{"levels", "1,9"}}), ErrorKind::Range);
  EXPECT_EQ(kind_of("ablation", {{"off", "delta"}}), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of("transfer", {{"epoch", 3}}), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of("transfer", {{"epochs", "many"}}), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of("spectrum", {{"input", "/nonexistent.txt"}}), ErrorKind::Io);
}

TEST(Experiments, GenerateIsDeterministic) {
  const json cfg = {{"topology", "csbm"}, {"nodes", 60}, {"edges", 12}, {"edge_size", 5}, {"seed", 3}};
  const CommandOutput a = run_command("generate", cfg.dump()), b = run_command("generate", cfg.dump());
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(a.summary, b.summary);
  EXPECT_EQ(a.text.rfind("nodes=60", 0), 0u);
}

TEST(Experiments, SpectrumCsvEmbedsConfig) {
  const CommandOutput gen = run_command("generate", json{{"topology", "her"}, {"n", 3}, {"m", 2}}.dump());
  const auto path = testing::TempDir() + "heal_spectrum_input.txt";
  {
    std::ofstream f(path);
    f << gen.text;
  }
  const CommandOutput out = run_command("spectrum", json{{"input", path}}.dump());
  EXPECT_EQ(out.text.rfind("# config: ", 0), 0u);
  EXPECT_NE(out.text.find("index,eigenvalue"), std::string::npos);
  const json s = json::parse(out.summary);
  EXPECT_FALSE(s["disconnected"].get<bool>());
}

TEST(Experiments, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678}) EXPECT_EQ(std::stod(format_double(v)), v);
}
