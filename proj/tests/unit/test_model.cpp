#include <gtest/gtest.h>

#include <filesystem>

#include "heal/error.hpp"
#include "heal/model.hpp"
#include "heal/rng.hpp"
#include "heal/synth.hpp"
#include "support/instances.hpp"

using namespace heal;

namespace {

ModelSpec small_spec(ModelKind kind) {
  ModelSpec spec;
  spec.kind = kind;
  spec.input_dim = 3;
  spec.num_classes = 2;
  spec.config.n_layers = 2;
  spec.config.hidden_dim = 4;
  spec.config.seed = 5;
  return spec;
}

}  // namespace

TEST(Model, ConfigValidation) {
  ModelConfig c;
  EXPECT_NO_THROW(c.validate());
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), HealError);
  c = ModelConfig{};
  c.hidden_dim = 0;
  EXPECT_THROW(c.validate(), HealError);
}

TEST(Model, DatasetTable) {
  const auto names = dataset_names();
  ASSERT_FALSE(names.empty());
  for (const auto& n : names) EXPECT_NO_THROW(dataset_defaults(n).validate());
  EXPECT_THROW(dataset_defaults("no-such-dataset"), HealError);
}

TEST(Model, KindNames) {
  EXPECT_EQ(parse_model_kind("heal"), ModelKind::Heal);
  EXPECT_EQ(to_string(ModelKind::Plain), "plain");
  EXPECT_THROW(parse_model_kind("gcn"), HealError);
}

TEST(Model, InitIsSeededAndLogitsHaveClassColumns) {
  CounterRng rng(71);
  const Hypergraph h = fixtures::random_hypergraph(rng, 9);
  const Partition p = choose_partition(h, "spectral", 0);
  const LayerGraph g = build_layer_graph(h, p);
  const FeatureMatrix x = fixtures::random_matrix(rng, 9, 3);
  for (ModelKind kind : {ModelKind::Heal, ModelKind::Plain}) {
    const ModelSpec spec = small_spec(kind);
    const ad::ParameterSet a = init_parameters(spec), b = init_parameters(spec);
    ASSERT_EQ(a.size(), b.size());
    for (const auto& [name, m] : a) EXPECT_EQ(max_abs_diff(m, b.at(name)), 0.0) << name;
    const DenseMatrix logits = model_logits(g, x, a, spec);
    EXPECT_EQ(logits.rows(), 9u);
    EXPECT_EQ(logits.cols(), 2u);
    EXPECT_TRUE(logits.all_finite());
  }
}

TEST(Model, PartitionStrategies) {
  const Hypergraph h = gen_random_uniform(12, 9, 3, 2);
  const Partition all = choose_partition(h, "all-interior", 0);
  EXPECT_TRUE(all.boundary_nodes.empty());
  const Partition spectral = choose_partition(h, "spectral", 0);
  EXPECT_FALSE(spectral.subset.empty());
  const std::vector<std::size_t> nodes{0, 1, 2};
  EXPECT_EQ(choose_partition(h, "file", 0, nodes).subset, nodes);
  EXPECT_THROW(choose_partition(h, "file", 0), HealError);
  EXPECT_THROW(choose_partition(h, "bogus", 0), HealError);
}

TEST(Model, CheckpointRoundTrip) {
  Checkpoint c{small_spec(ModelKind::Heal), {}};
  c.params = init_parameters(c.spec);
  const Checkpoint back = checkpoint_from_json(checkpoint_to_json(c));
  EXPECT_EQ(back.spec.config.hidden_dim, 4u);
  EXPECT_EQ(back.spec.kind, ModelKind::Heal);
  ASSERT_EQ(back.params.size(), c.params.size());
  for (const auto& [name, m] : c.params) EXPECT_EQ(max_abs_diff(m, back.params.at(name)), 0.0) << name;

  const auto path = std::filesystem::temp_directory_path() / "heal_checkpoint.json";
  save_checkpoint(c, path.string());
  EXPECT_EQ(load_checkpoint(path.string()).params.size(), c.params.size());
  std::filesystem::remove(path);
  EXPECT_THROW(checkpoint_from_json("{\"spec\": 3}"), HealError);
}
