#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "poolbound/rng.hpp"
#include "poolbound/tensor.hpp"

namespace poolbound {

enum class Activation { Tanh, Relu, Identity };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct DenseLayer {
  DenseArray weight;  // out x in, row-major
  DenseArray bias;    // out
};

// Fully connected net. The hidden activation is `activation`; the output
// layer is always linear.
struct Mlp {
  std::vector<std::size_t> widths;  // input, hidden..., output
  std::vector<DenseLayer> layers;
  Activation activation = Activation::Tanh;

  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  std::size_t parameter_count() const;
};

// Weights and biases drawn uniform in [-a, a], a = sqrt(6/(fan_in+fan_out)),
// layer by layer, weight matrix (row-major) before bias.
Mlp make_mlp(std::vector<std::size_t> widths, Activation act, Rng& rng);
Mlp make_zero_mlp(std::vector<std::size_t> widths, Activation act);

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input);

struct MlpTrace {
  std::vector<std::vector<double>> acts;  // acts[0] = input, acts[l+1] = layer l output
  std::vector<std::vector<double>> pre;   // pre-activations per layer
};

std::vector<double> mlp_forward_trace(const Mlp& net,
                                      std::span<const double> input,
                                      MlpTrace& trace);

struct MlpVjp {
  std::vector<double> input_grad;
  std::vector<double> param_grad;  // flat, same layout as flatten_params
};

MlpVjp mlp_vjp(const Mlp& net, std::span<const double> input,
               std::span<const double> cotangent);
MlpVjp mlp_vjp_with_trace(const Mlp& net, const MlpTrace& trace,
                          std::span<const double> cotangent);

// Per-output-coordinate gradients assembled from reverse passes over one
// shared forward trace.
struct MlpJacobian {
  DenseArray input_jacobian;  // out x in
  DenseArray param_jacobian;  // out x parameter_count
};

MlpJacobian mlp_gradient(const Mlp& net, std::span<const double> input);

std::vector<double> flatten_params(const Mlp& net);
void set_params(Mlp& net, std::span<const double> params);

// Affine in its input: either a single linear layer or identity activation
// throughout.
bool is_affine(const Mlp& net);

// Central finite differences, the reference oracle for analytic gradients.
template <typename F>
std::vector<double> finite_difference_gradient(const F& f,
                                               std::span<const double> x,
                                               double step) {
  if (step <= 0.0) throw std::invalid_argument("finite_difference_gradient: step <= 0");
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> grad(xs.size(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double keep = xs[i];
    xs[i] = keep + step;
    const double fp = f(std::span<const double>(xs));
    xs[i] = keep - step;
    const double fm = f(std::span<const double>(xs));
    xs[i] = keep;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::runtime_error("finite_difference_gradient: non-finite value");
    }
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

}  // namespace poolbound
