#include "heal/autodiff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "heal/error.hpp"
#include "heal/rng.hpp"

namespace heal::ad {

const DenseMatrix& Var::value() const { return tape->value(id); }
const DenseMatrix& Var::grad() const { return tape->grad(id); }

Var Tape::leaf(DenseMatrix value) {
  nodes_.push_back({std::move(value), {}, true, {}});
  return {this, nodes_.size() - 1};
}

Var Tape::constant(DenseMatrix value) {
  nodes_.push_back({std::move(value), {}, false, {}});
  return {this, nodes_.size() - 1};
}

Var Tape::record(DenseMatrix value, std::span<const Var> parents, Backward backward) {
  bool needs = false;
  for (const Var& p : parents) {
    require(p.tape == this, "variable belongs to a different tape");
    needs = needs || nodes_[p.id].needs_grad;
  }
  nodes_.push_back({std::move(value), {}, needs, needs ? std::move(backward) : Backward{}});
  return {this, nodes_.size() - 1};
}

const DenseMatrix& Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) {
    zero_ = DenseMatrix(n.value.rows(), n.value.cols());
    return zero_;
  }
  return n.grad;
}

DenseMatrix& Tape::grad_accumulator(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols())
    n.grad = DenseMatrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  require(loss.tape == this, "loss belongs to a different tape");
  const DenseMatrix& lv = nodes_[loss.id].value;
  require(lv.rows() == 1 && lv.cols() == 1, "backward needs a scalar output");
  for (Node& n : nodes_) n.grad = DenseMatrix();
  grad_accumulator(loss.id)(0, 0) = 1.0;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.needs_grad || !n.backward || n.grad.empty()) continue;
    const DenseMatrix g = n.grad;
    n.backward(*this, g);
  }
}

DenseMatrix GatherPlan::apply(const DenseMatrix& x) const {
  require(x.rows() == input_rows, "gather input has " + std::to_string(x.rows()) + " rows, plan expects " +
                                      std::to_string(input_rows));
  DenseMatrix out(output_rows(), x.cols());
  for (std::size_t r = 0; r < output_rows(); ++r) {
    auto orow = out.row(r);
    for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) {
      const double w = weight[k];
      auto xr = x.row(index[k]);
      for (std::size_t c = 0; c < x.cols(); ++c) orow[c] += w * xr[c];
    }
  }
  return out;
}

namespace {

void check_same(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorKind::InvalidArgument, std::string("shape mismatch in ") + op + ": " + std::to_string(a.rows()) + "x" +
                                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                         std::to_string(b.cols()));
}

template <typename F, typename D>
Var unary(Var a, F f, D df) {
  const DenseMatrix& x = a.value();
  DenseMatrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y.values()[i] = f(x.values()[i]);
  const std::array<Var, 1> parents{a};
  return a.tape->record(std::move(y), parents, [a, df](Tape& t, const DenseMatrix& g) {
    if (!t.needs_grad(a.id)) return;
    const DenseMatrix& x = t.value(a.id);
    DenseMatrix& ga = t.grad_accumulator(a.id);
    for (std::size_t i = 0; i < x.size(); ++i) ga.values()[i] += g.values()[i] * df(x.values()[i]);
  });
}

constexpr double kGeluC = 0.044715;
const double kGeluK = std::sqrt(2.0 / std::numbers::pi);

}  // namespace

double gelu_value(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluK * (x + kGeluC * x * x * x))); }

double gelu_derivative(double x) {
  const double t = std::tanh(kGeluK * (x + kGeluC * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluK * (1.0 + 3.0 * kGeluC * x * x);
}

double softplus_value(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Var matmul(Var a, Var b) {
  const std::array<Var, 2> parents{a, b};
  return a.tape->record(a.value() * b.value(), parents, [a, b](Tape& t, const DenseMatrix& g) {
    if (t.needs_grad(a.id)) t.grad_accumulator(a.id) += matmul_nt(g, t.value(b.id));
    if (t.needs_grad(b.id)) t.grad_accumulator(b.id) += matmul_tn(t.value(a.id), g);
  });
}

Var add(Var a, Var b) {
  const DenseMatrix& x = a.value();
  const DenseMatrix& y = b.value();
  const bool same = x.rows() == y.rows() && x.cols() == y.cols();
  const bool row_b = !same && y.rows() == 1 && y.cols() == x.cols();
  const bool col_b = !same && !row_b && y.cols() == 1 && y.rows() == x.rows();
  const bool scalar_b = !same && !row_b && !col_b && y.rows() == 1 && y.cols() == 1;
  if (!(same || row_b || col_b || scalar_b)) check_same(x, y, "add");
  DenseMatrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      out(r, c) += same ? y(r, c) : row_b ? y(0, c) : col_b ? y(r, 0) : y(0, 0);
  const std::array<Var, 2> parents{a, b};
  return a.tape->record(std::move(out), parents, [a, b, same, row_b, col_b](Tape& t, const DenseMatrix& g) {
    if (t.needs_grad(a.id)) t.grad_accumulator(a.id) += g;
    if (!t.needs_grad(b.id)) return;
    DenseMatrix& gb = t.grad_accumulator(b.id);
    if (same) {
      gb += g;
      return;
    }
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) {
        if (row_b) gb(0, c) += g(r, c);
        else if (col_b) gb(r, 0) += g(r, c);
        else gb(0, 0) += g(r, c);
      }
  });
}

Var scale(Var a, double s) {
  DenseMatrix out = a.value();
  out *= s;
  const std::array<Var, 1> parents{a};
  return a.tape->record(std::move(out), parents, [a, s](Tape& t, const DenseMatrix& g) {
    if (!t.needs_grad(a.id)) return;
    DenseMatrix& ga = t.grad_accumulator(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.values()[i] += s * g.values()[i];
  });
}

Var offset(Var a, double c) {
  return unary(a, [c](double x) { return x + c; }, [](double) { return 1.0; });
}

Var mul(Var a, Var b) {
  const DenseMatrix& x = a.value();
  const DenseMatrix& y = b.value();
  const bool same = x.rows() == y.rows() && x.cols() == y.cols();
  if (!same && !(y.cols() == 1 && y.rows() == x.rows())) check_same(x, y, "mul");
  DenseMatrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) *= same ? y(r, c) : y(r, 0);
  const std::array<Var, 2> parents{a, b};
  return a.tape->record(std::move(out), parents, [a, b, same](Tape& t, const DenseMatrix& g) {
    const DenseMatrix& x = t.value(a.id);
    const DenseMatrix& y = t.value(b.id);
    if (t.needs_grad(a.id)) {
      DenseMatrix& ga = t.grad_accumulator(a.id);
      for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) ga(r, c) += g(r, c) * (same ? y(r, c) : y(r, 0));
    }
    if (t.needs_grad(b.id)) {
      DenseMatrix& gb = t.grad_accumulator(b.id);
      for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) (same ? gb(r, c) : gb(r, 0)) += g(r, c) * x(r, c);
    }
  });
}

Var gelu(Var a) { return unary(a, gelu_value, gelu_derivative); }

Var softplus(Var a) {
  return unary(a, softplus_value, [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

Var reciprocal(Var a) {
  for (double v : a.value().values())
    if (v == 0.0) fail(ErrorKind::Numerical, "reciprocal of zero");
  return unary(a, [](double x) { return 1.0 / x; }, [](double x) { return -1.0 / (x * x); });
}

Var row_layernorm(Var x, Var gain, Var bias, double eps) {
  const DenseMatrix& xv = x.value();
  const std::size_t n = xv.rows(), c = xv.cols();
  require(gain.rows() == 1 && gain.cols() == c && bias.rows() == 1 && bias.cols() == c,
          "layernorm gain and bias must be 1 x cols");
  DenseMatrix xhat(n, c), out(n, c);
  std::vector<double> inv_std(n);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = xv.row(r);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(c);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t k = 0; k < c; ++k) {
      xhat(r, k) = (row[k] - mean) * inv_std[r];
      out(r, k) = xhat(r, k) * gain.value()(0, k) + bias.value()(0, k);
    }
  }
  const std::array<Var, 3> parents{x, gain, bias};
  return x.tape->record(std::move(out), parents,
                        [x, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t,
                                                                                           const DenseMatrix& g) {
                          const std::size_t n = g.rows(), c = g.cols();
                          const DenseMatrix& gv = t.value(gain.id);
                          if (t.needs_grad(gain.id)) {
                            DenseMatrix& gg = t.grad_accumulator(gain.id);
                            for (std::size_t r = 0; r < n; ++r)
                              for (std::size_t k = 0; k < c; ++k) gg(0, k) += g(r, k) * xhat(r, k);
                          }
                          if (t.needs_grad(bias.id)) {
                            DenseMatrix& gb = t.grad_accumulator(bias.id);
                            for (std::size_t r = 0; r < n; ++r)
                              for (std::size_t k = 0; k < c; ++k) gb(0, k) += g(r, k);
                          }
                          if (!t.needs_grad(x.id)) return;
                          DenseMatrix& gx = t.grad_accumulator(x.id);
                          std::vector<double> dxhat(c);
                          for (std::size_t r = 0; r < n; ++r) {
                            double m1 = 0.0, m2 = 0.0;
                            for (std::size_t k = 0; k < c; ++k) {
                              dxhat[k] = g(r, k) * gv(0, k);
                              m1 += dxhat[k];
                              m2 += dxhat[k] * xhat(r, k);
                            }
                            m1 /= static_cast<double>(c);
                            m2 /= static_cast<double>(c);
                            for (std::size_t k = 0; k < c; ++k)
                              gx(r, k) += inv_std[r] * (dxhat[k] - m1 - xhat(r, k) * m2);
                          }
                        });
}

Var dropout(Var x, double rate, std::uint64_t key, bool train) {
  require(rate >= 0 && rate < 1, "dropout rate must lie in [0, 1)");
  if (!train || rate == 0.0) return x;
  const DenseMatrix& xv = x.value();
  CounterRng rng(key);
  DenseMatrix mask(xv.rows(), xv.cols());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask.values()) m = rng.uniform() >= rate ? keep_scale : 0.0;
  DenseMatrix out = xv;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= mask.values()[i];
  const std::array<Var, 1> parents{x};
  return x.tape->record(std::move(out), parents, [x, mask = std::move(mask)](Tape& t, const DenseMatrix& g) {
    if (!t.needs_grad(x.id)) return;
    DenseMatrix& gx = t.grad_accumulator(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx.values()[i] += g.values()[i] * mask.values()[i];
  });
}

Var gather_sum(Var x, const GatherPlan& plan) {
  const std::array<Var, 1> parents{x};
  return x.tape->record(plan.apply(x.value()), parents, [x, &plan](Tape& t, const DenseMatrix& g) {
    if (!t.needs_grad(x.id)) return;
    DenseMatrix& gx = t.grad_accumulator(x.id);
    for (std::size_t r = 0; r < plan.output_rows(); ++r) {
      auto gr = g.row(r);
      for (std::size_t k = plan.offsets[r]; k < plan.offsets[r + 1]; ++k) {
        auto dst = gx.row(plan.index[k]);
        const double w = plan.weight[k];
        for (std::size_t c = 0; c < g.cols(); ++c) dst[c] += w * gr[c];
      }
    }
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::array<Var, 1> parents{a};
  return a.tape->record(DenseMatrix(1, 1, s), parents, [a](Tape& t, const DenseMatrix& g) {
    if (!t.needs_grad(a.id)) return;
    for (double& v : t.grad_accumulator(a.id).values()) v += g(0, 0);
  });
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels, std::span<const std::size_t> rows) {
  const DenseMatrix& z = logits.value();
  require(labels.size() == z.rows(), "one label per logit row is required");
  require(!rows.empty(), "cross entropy needs at least one row");
  DenseMatrix probs(rows.size(), z.cols());
  double loss = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t r = rows[k];
    require(r < z.rows(), "cross entropy row out of range");
    const int y = labels[r];
    require(y >= 0 && static_cast<std::size_t>(y) < z.cols(), "label out of range");
    auto zr = z.row(r);
    const double mx = *std::max_element(zr.begin(), zr.end());
    double norm = 0.0;
    for (std::size_t c = 0; c < z.cols(); ++c) norm += std::exp(zr[c] - mx);
    for (std::size_t c = 0; c < z.cols(); ++c) probs(k, c) = std::exp(zr[c] - mx) / norm;
    loss -= (zr[static_cast<std::size_t>(y)] - mx) - std::log(norm);
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  std::vector<std::size_t> row_copy(rows.begin(), rows.end());
  std::vector<int> label_copy;
  for (std::size_t r : rows) label_copy.push_back(labels[r]);
  const std::array<Var, 1> parents{logits};
  return logits.tape->record(
      DenseMatrix(1, 1, loss * inv), parents,
      [logits, probs = std::move(probs), row_copy = std::move(row_copy), label_copy = std::move(label_copy),
       inv](Tape& t, const DenseMatrix& g) {
        if (!t.needs_grad(logits.id)) return;
        DenseMatrix& gz = t.grad_accumulator(logits.id);
        for (std::size_t k = 0; k < row_copy.size(); ++k)
          for (std::size_t c = 0; c < probs.cols(); ++c) {
            const double target = static_cast<int>(c) == label_copy[k] ? 1.0 : 0.0;
            gz(row_copy[k], c) += g(0, 0) * inv * (probs(k, c) - target);
          }
      });
}

GradCheck grad_check_detail(const GraphFn& f, const std::vector<DenseMatrix>& leaves, double eps) {
  GradCheck out;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& l : leaves) vars.push_back(tape.leaf(l));
    Var loss = f(tape, vars);
    tape.backward(loss);
    for (const Var& v : vars) out.analytic.push_back(v.grad());
  }
  auto evaluate = [&](const std::vector<DenseMatrix>& values) {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& l : values) vars.push_back(tape.constant(l));
    return f(tape, vars).value()(0, 0);
  };
  auto relative = [](double diff, double scale) { return scale < 1e-10 ? diff : diff / scale; };
  std::vector<DenseMatrix> probe = leaves;
  double diff_sq = 0.0, analytic_sq = 0.0, numeric_sq = 0.0;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    DenseMatrix numeric(leaves[k].rows(), leaves[k].cols());
    for (std::size_t i = 0; i < leaves[k].size(); ++i) {
      const double x0 = leaves[k].values()[i];
      probe[k].values()[i] = x0 + eps;
      const double fp = evaluate(probe);
      probe[k].values()[i] = x0 - eps;
      const double fm = evaluate(probe);
      probe[k].values()[i] = x0;
      numeric.values()[i] = (fp - fm) / (2.0 * eps);
    }
    const double diff = (out.analytic[k] - numeric).frobenius();
    const double a = out.analytic[k].frobenius(), n = numeric.frobenius();
    out.leaf_errors.push_back(relative(diff, std::max(a, n)));
    diff_sq += diff * diff;
    analytic_sq += a * a;
    numeric_sq += n * n;
    out.numeric.push_back(std::move(numeric));
  }
  out.overall_error = relative(std::sqrt(diff_sq), std::sqrt(std::max(analytic_sq, numeric_sq)));
  return out;
}

std::vector<double> grad_check(const GraphFn& f, const std::vector<DenseMatrix>& leaves, double eps) {
  return grad_check_detail(f, leaves, eps).leaf_errors;
}

}  // namespace heal::ad
