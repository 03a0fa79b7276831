#include "uanet/train/optim.hpp"

#include <cmath>

namespace uanet::train {

double global_norm(const ad::ParamStore& params) {
  double s = 0.0;
  for (const auto& [name, t] : params)
    for (double g : t.grad()) s += g * g;
  return std::sqrt(s);
}

double clip_grad_norm(ad::ParamStore& params, double max_norm) {
  const double norm = global_norm(params);
  if (max_norm > 0.0 && norm > max_norm) {
    const double k = max_norm / norm;
    for (auto& [name, t] : params)
      for (double& g : t.grad()) g *= k;
  }
  return norm;
}

void sgd_step(ad::ParamStore& params, double lr) {
  for (auto& [name, t] : params) {
    auto v = t.data();
    auto g = t.grad();
    for (std::size_t i = 0; i < g.size(); ++i) v[i] -= lr * g[i];
  }
}

void Adam::step(ad::ParamStore& params) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (auto& [name, t] : params) {
    auto g = t.grad();
    if (g.empty()) continue;
    auto& [m, v] = moments_[name];
    if (m.empty()) {
      m.assign(g.size(), 0.0);
      v.assign(g.size(), 0.0);
    }
    auto x = t.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      x[i] -= cfg_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
    }
  }
}

}  // namespace uanet::train
