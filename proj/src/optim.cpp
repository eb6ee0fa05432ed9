#include <cmath>

#include "heal/autodiff.hpp"
#include "heal/error.hpp"

namespace heal::ad {

void Sgd::step(ParameterSet& params, const ParameterSet& grads) {
  for (auto& [name, w] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) continue;
    require(it->second.size() == w.size(), "gradient shape mismatch for " + name);
    for (std::size_t i = 0; i < w.size(); ++i)
      w.values()[i] -= lr_ * (it->second.values()[i] + weight_decay_ * w.values()[i]);
  }
}

void Adam::step(ParameterSet& params, const ParameterSet& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& [name, w] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) continue;
    const DenseMatrix& g = it->second;
    require(g.size() == w.size(), "gradient shape mismatch for " + name);
    auto [mi, fresh_m] = m_.try_emplace(name, w.rows(), w.cols());
    auto [vi, fresh_v] = v_.try_emplace(name, w.rows(), w.cols());
    auto& m = mi->second.values();
    auto& v = vi->second.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g.values()[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * gi;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * gi * gi;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w.values()[i] -= lr_ * (mhat / (std::sqrt(vhat) + eps_) + weight_decay_ * w.values()[i]);
    }
  }
}

}  // namespace heal::ad
