#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heal/autodiff.hpp"
#include "heal/hypergraph.hpp"
#include "heal/layer.hpp"

namespace heal {

struct ModelConfig {
  std::size_t n_layers = 2;
  std::size_t hidden_dim = 64;
  double dropout = 0.5;
  double learning_rate = 5e-3;
  double weight_decay = 5e-4;
  double tau = 0.5;
  double coupling_lambda = 1.0;
  double coupling_mu = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Rows of the node classification hyperparameter table, keyed by dataset name.
ModelConfig dataset_defaults(const std::string& dataset);
std::vector<std::string> dataset_names();

enum class ModelKind { Heal, Plain };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct ModelSpec {
  ModelKind kind = ModelKind::Heal;
  std::size_t input_dim = 0;
  std::size_t num_classes = 2;
  ModelConfig config;
  Ablation ablation;
  bool layernorm = true;
};

ad::ParameterSet init_parameters(const ModelSpec& spec);

struct ForwardOutput {
  ad::Var logits;
  ad::Var embedded;  // node state after the input map
  ad::Var final_nodes;
};

VarMap bind_parameters(ad::Tape& tape, const ad::ParameterSet& params, bool trainable);

// step feeds the dropout key so every training step draws a fresh mask.
ForwardOutput model_forward(const LayerGraph& g, ad::Var x_in, const VarMap& w, const ModelSpec& spec, bool train,
                            std::uint64_t step);

DenseMatrix model_logits(const LayerGraph& g, const FeatureMatrix& x_in, const ad::ParameterSet& params,
                         const ModelSpec& spec);

Partition choose_partition(const Hypergraph& h, const std::string& strategy, std::uint64_t seed,
                           std::span<const std::size_t> file_nodes = {});

struct Checkpoint {
  ModelSpec spec;
  ad::ParameterSet params;
};

std::string checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace heal
