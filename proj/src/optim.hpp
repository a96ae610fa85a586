#pragma once

#include <map>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace nee {

// Named parameter set. std::map keeps iteration order deterministic, which
// pins the optimizer update order and the checkpoint layout.
struct Params {
  std::map<std::string, Tensor> by_name;

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const {
    return by_name.count(name) != 0;
  }
  size_t total_values() const;
  std::vector<std::string> names() const;
};

using GradMap = std::map<std::string, std::vector<double>>;

struct AdamState {
  std::map<std::string, std::vector<double>> m;  // first moment
  std::map<std::string, std::vector<double>> v;  // second moment
  uint64_t t = 0;                                // completed steps

  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One Adam update over every parameter that has a gradient entry; parameters
// without one are left untouched. Increments state.t.
void adam_step(Params& params, const GradMap& grads, AdamState& state,
               double lr);

// Inverse-square-root warmup schedule:
//   lr(t) = d^(-1/2) * min(t^(-1/2), t * W^(-3/2))
// increasing up to t = W, decreasing after.
struct LrSchedule {
  size_t embed_dim = 16;
  size_t warmup_steps = 4000;
};

double lr_at(const LrSchedule& schedule, uint64_t t);

}  // namespace nee
