#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "uanet/autodiff/params.hpp"

namespace uanet::train {

// sqrt of the summed squared gradients over every parameter.
double global_norm(const ad::ParamStore& params);

// Rescales all gradients so the global norm is at most max_norm. Returns the
// norm before clipping. max_norm <= 0 disables clipping.
double clip_grad_norm(ad::ParamStore& params, double max_norm);

// Plain SGD; the learning rate is passed per step so the caller owns the
// schedule.
void sgd_step(ad::ParamStore& params, double lr);

// lr / (1 + decay · epoch)
inline double decayed_lr(double lr, double decay, std::size_t epoch) {
  return lr / (1.0 + decay * static_cast<double>(epoch));
}

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}
  void step(ad::ParamStore& params);
  std::size_t steps() const { return t_; }

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> moments_;
};

}  // namespace uanet::train
