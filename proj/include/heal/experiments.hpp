#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "heal/autodiff.hpp"
#include "heal/hypergraph.hpp"
#include "heal/model.hpp"
#include "heal/synth.hpp"

namespace heal {

struct NodeTask {
  Hypergraph hypergraph;
  Partition partition;
  FeatureMatrix features;
  std::vector<int> labels;
  std::size_t num_classes = 2;
  std::vector<std::size_t> train, val, test;
};

struct TrainOptions {
  std::size_t max_epochs = 200;
  bool measure_energy = false;
};

struct TrainResult {
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::size_t epochs = 0;
  double input_energy = 0.0;
  double final_energy = 0.0;
  ad::ParameterSet params;
};

double accuracy(const DenseMatrix& logits, const std::vector<int>& labels, const std::vector<std::size_t>& rows);

// Test accuracy is read at the epoch with the best validation accuracy when a
// validation split exists, otherwise at the last epoch.
TrainResult train_node_classifier(const NodeTask& task, const ModelSpec& spec, const TrainOptions& options);

// Batches samples of a transfer topology as a disjoint union; only target rows are labelled.
NodeTask transfer_task(const std::string& topology, std::size_t n, std::size_t m, std::uint64_t seed,
                       std::size_t train_samples, std::size_t val_samples, std::size_t test_samples,
                       const std::string& partition_strategy);

NodeTask csbm_task(const CsbmParams& params, const std::string& partition_strategy);
NodeTask regular_task(const RegularParams& params, const std::string& partition_strategy);

std::size_t thread_budget();
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

std::string format_double(double v);

// Each command merges its config over built-in defaults; the merged config is embedded in the output.
struct CommandOutput {
  std::string text;     // CSV for tabular commands, JSON otherwise
  std::string summary;  // optional JSON side output
};

std::string command_defaults(const std::string& command);
CommandOutput run_command(const std::string& command, const std::string& config_json);

}  // namespace heal
