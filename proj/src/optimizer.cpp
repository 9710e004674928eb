#include "poolbound/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poolbound {

const char* opt_method_name(OptMethod m) {
  return m == OptMethod::Sgd ? "sgd" : "adam";
}

OptMethod opt_method_from_name(const std::string& name) {
  if (name == "sgd") return OptMethod::Sgd;
  if (name == "adam") return OptMethod::Adam;
  throw std::invalid_argument("unknown optimizer: " + name);
}

OptimizerState OptimizerState::sgd(double step_size) {
  OptimizerState s;
  s.method = OptMethod::Sgd;
  s.step_size = step_size;
  return s;
}

OptimizerState OptimizerState::adam(double step_size) {
  OptimizerState s;
  s.method = OptMethod::Adam;
  s.step_size = step_size;
  return s;
}

void optimizer_step(OptimizerState& state, std::span<double> params,
                    std::span<const double> grads) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("optimizer_step: size mismatch");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) {
      throw std::invalid_argument("optimizer_step: non-finite gradient");
    }
  }

  const std::vector<double> backup(params.begin(), params.end());
  state.step_count += 1;

  if (state.method == OptMethod::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] -= state.step_size * grads[i];
    }
  } else {
    if (state.m.empty()) {
      state.m.assign(params.size(), 0.0);
      state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size()) {
      throw std::invalid_argument("optimizer_step: moment size mismatch");
    }
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
      state.v[i] = b2 * state.v[i] + (1.0 - b2) * grads[i] * grads[i];
      const double mhat = state.m[i] / c1;
      const double vhat = state.v[i] / c2;
      params[i] -= state.step_size * mhat / (std::sqrt(vhat) + state.eps);
    }
  }

  for (double p : params) {
    if (!std::isfinite(p)) {
      std::copy(backup.begin(), backup.end(), params.begin());
      throw std::runtime_error("optimizer_step: non-finite parameter update");
    }
  }
}

}  // namespace poolbound
