#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace poolbound {

enum class OptMethod { Sgd, Adam };

const char* opt_method_name(OptMethod m);
OptMethod opt_method_from_name(const std::string& name);

struct OptimizerState {
  OptMethod method = OptMethod::Sgd;
  double step_size = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;  // first moment (adam)
  std::vector<double> v;  // second moment (adam)
  std::uint64_t step_count = 0;

  static OptimizerState sgd(double step_size);
  static OptimizerState adam(double step_size);
};

// In-place update. Rejects non-finite gradients and rolls back if the update
// would produce non-finite parameters.
void optimizer_step(OptimizerState& state, std::span<double> params,
                    std::span<const double> grads);

}  // namespace poolbound
