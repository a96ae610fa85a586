#include "optim.hpp"

#include <cmath>

namespace nee {

Tensor& Params::at(const std::string& name) {
  auto it = by_name.find(name);
  if (it == by_name.end()) {
    fail(ErrorKind::InvalidArgument, "unknown parameter '" + name + "'");
  }
  return it->second;
}

const Tensor& Params::at(const std::string& name) const {
  auto it = by_name.find(name);
  if (it == by_name.end()) {
    fail(ErrorKind::InvalidArgument, "unknown parameter '" + name + "'");
  }
  return it->second;
}

size_t Params::total_values() const {
  size_t n = 0;
  for (const auto& [_, t] : by_name) n += t.size();
  return n;
}

std::vector<std::string> Params::names() const {
  std::vector<std::string> out;
  out.reserve(by_name.size());
  for (const auto& [name, _] : by_name) out.push_back(name);
  return out;
}

void adam_step(Params& params, const GradMap& grads, AdamState& state,
               double lr) {
  state.t += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (auto& [name, p] : params.by_name) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const std::vector<double>& g = git->second;
    if (g.size() != p.size()) {
      fail(ErrorKind::InvalidArgument,
           "adam_step: gradient shape mismatch for '" + name + "'");
    }
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.empty()) m.assign(p.size(), 0.0);
    if (v.empty()) v.assign(p.size(), 0.0);
    if (m.size() != p.size() || v.size() != p.size()) {
      fail(ErrorKind::InvalidArgument,
           "adam_step: moment shape mismatch for '" + name + "'");
    }
    std::vector<double> next = p.values();
    for (size_t i = 0; i < next.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mh = m[i] / bias1;
      const double vh = v[i] / bias2;
      next[i] -= lr * mh / (std::sqrt(vh) + state.epsilon);
    }
    p = Tensor(p.shape(), std::move(next), p.requires_grad());
  }
}

double lr_at(const LrSchedule& schedule, uint64_t t) {
  if (t < 1) fail(ErrorKind::InvalidArgument, "lr_at: step must be >= 1");
  const double td = static_cast<double>(t);
  const double w = static_cast<double>(schedule.warmup_steps);
  const double d = static_cast<double>(schedule.embed_dim);
  return (1.0 / std::sqrt(d)) *
         std::min(1.0 / std::sqrt(td), td * std::pow(w, -1.5));
}

}  // namespace nee
