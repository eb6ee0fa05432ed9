#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "heal/dense.hpp"

namespace heal::ad {

class Tape;

struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const DenseMatrix& value() const;
  const DenseMatrix& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const DenseMatrix& out_grad)>;

  Var leaf(DenseMatrix value);
  Var constant(DenseMatrix value);
  Var record(DenseMatrix value, std::span<const Var> parents, Backward backward);

  const DenseMatrix& value(std::size_t id) const { return nodes_[id].value; }
  const DenseMatrix& grad(std::size_t id) const;
  DenseMatrix& grad_accumulator(std::size_t id);
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse pass from a 1x1 output; every vertex is visited once, newest first.
  void backward(Var loss);

 private:
  struct Node {
    DenseMatrix value;
    DenseMatrix grad;
    bool needs_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
  mutable DenseMatrix zero_;
};

// Fixed sparse aggregation: out[r] = sum_k weight[k] * x[index[k]] over k in [offsets[r], offsets[r+1]).
struct GatherPlan {
  std::size_t input_rows = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> index;
  std::vector<double> weight;

  std::size_t output_rows() const { return offsets.size() - 1; }
  void add(std::size_t src, double w) {
    index.push_back(src);
    weight.push_back(w);
  }
  void end_row() { offsets.push_back(index.size()); }
  DenseMatrix apply(const DenseMatrix& x) const;
};

Var matmul(Var a, Var b);
// b may match a, or be a 1 x cols row, a rows x 1 column, or a 1x1 scalar.
Var add(Var a, Var b);
Var scale(Var a, double s);
Var offset(Var a, double c);
// Hadamard product; b may match a or be a rows x 1 column.
Var mul(Var a, Var b);
Var gelu(Var a);
Var softplus(Var a);
Var reciprocal(Var a);
Var row_layernorm(Var x, Var gain, Var bias, double eps = 1e-5);
// Inverted dropout; identity outside train mode or at rate 0.
Var dropout(Var x, double rate, std::uint64_t key, bool train);
// The plan is referenced by the backward pass and must outlive the tape.
Var gather_sum(Var x, const GatherPlan& plan);
Var sum(Var a);
// Mean cross entropy over the selected rows.
Var softmax_cross_entropy(Var logits, std::span<const int> labels, std::span<const std::size_t> rows);

double gelu_value(double x);
double gelu_derivative(double x);
double softplus_value(double x);

using GraphFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheck {
  std::vector<DenseMatrix> analytic;
  std::vector<DenseMatrix> numeric;
  std::vector<double> leaf_errors;  // normwise relative error per leaf
  double overall_error = 0.0;       // same over all leaves stacked
};

GradCheck grad_check_detail(const GraphFn& f, const std::vector<DenseMatrix>& leaves, double eps = 1e-5);

// Normwise relative error between reverse-mode and central-difference gradients, per leaf.
std::vector<double> grad_check(const GraphFn& f, const std::vector<DenseMatrix>& leaves, double eps = 1e-5);

using ParameterSet = std::map<std::string, DenseMatrix>;

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(ParameterSet& params, const ParameterSet& grads) = 0;
};

class Sgd : public Optimizer {
 public:
  Sgd(double lr, double weight_decay = 0.0) : lr_(lr), weight_decay_(weight_decay) {}
  void step(ParameterSet& params, const ParameterSet& grads) override;

 private:
  double lr_;
  double weight_decay_;
};

// Adam with decoupled weight decay.
class Adam : public Optimizer {
 public:
  Adam(double lr, double weight_decay = 0.0, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(ParameterSet& params, const ParameterSet& grads) override;
  std::uint64_t steps() const { return t_; }

 private:
  double lr_, weight_decay_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  ParameterSet m_, v_;
};

}  // namespace heal::ad
