#include "poolbound/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "poolbound/kernels.hpp"

namespace poolbound {

namespace {

void check_widths(const std::vector<std::size_t>& widths) {
  if (widths.size() < 2) {
    throw std::invalid_argument("mlp: need at least input and output widths");
  }
  for (std::size_t w : widths) {
    if (w == 0) throw std::invalid_argument("mlp: zero layer width");
  }
}

void apply_activation(Activation act, std::vector<double>& v) {
  switch (act) {
    case Activation::Tanh:
      for (double& x : v) x = std::tanh(x);
      break;
    case Activation::Relu:
      for (double& x : v) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::Identity:
      break;
  }
}

// Derivative of the hidden activation given pre-activation z and post value a.
inline double activation_deriv(Activation act, double z, double a) {
  switch (act) {
    case Activation::Tanh:
      return 1.0 - a * a;
    case Activation::Relu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::Identity:
      return 1.0;
  }
  return 1.0;
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Identity: return "identity";
  }
  return "tanh";
}

Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation: " + name);
}

std::size_t Mlp::parameter_count() const {
  std::size_t p = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    p += widths[l + 1] * widths[l] + widths[l + 1];
  }
  return p;
}

Mlp make_mlp(std::vector<std::size_t> widths, Activation act, Rng& rng) {
  check_widths(widths);
  Mlp net;
  net.widths = std::move(widths);
  net.activation = act;
  for (std::size_t l = 0; l + 1 < net.widths.size(); ++l) {
    const std::size_t fan_in = net.widths[l];
    const std::size_t fan_out = net.widths[l + 1];
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer;
    layer.weight = DenseArray::zeros({fan_out, fan_in});
    layer.bias = DenseArray::zeros({fan_out});
    for (double& w : layer.weight.data) w = rng.uniform(-a, a);
    for (double& b : layer.bias.data) b = rng.uniform(-a, a);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Mlp make_zero_mlp(std::vector<std::size_t> widths, Activation act) {
  check_widths(widths);
  Mlp net;
  net.widths = std::move(widths);
  net.activation = act;
  for (std::size_t l = 0; l + 1 < net.widths.size(); ++l) {
    DenseLayer layer;
    layer.weight = DenseArray::zeros({net.widths[l + 1], net.widths[l]});
    layer.bias = DenseArray::zeros({net.widths[l + 1]});
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input) {
  if (input.size() != net.input_width()) {
    throw std::invalid_argument("mlp_forward: input width mismatch");
  }
  require_finite(input, "mlp_forward input");
  std::vector<double> a(input.begin(), input.end());
  std::vector<double> z;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const DenseLayer& layer = net.layers[l];
    z.assign(layer.weight.rows(), 0.0);
    kern::matvec(layer.weight.data.data(), a.data(), layer.bias.data.data(),
                 z.data(), layer.weight.rows(), layer.weight.cols());
    if (l + 1 < net.layers.size()) apply_activation(net.activation, z);
    a.swap(z);
  }
  require_finite(a, "mlp_forward output");
  return a;
}

std::vector<double> mlp_forward_trace(const Mlp& net,
                                      std::span<const double> input,
                                      MlpTrace& trace) {
  if (input.size() != net.input_width()) {
    throw std::invalid_argument("mlp_forward_trace: input width mismatch");
  }
  trace.acts.clear();
  trace.pre.clear();
  trace.acts.emplace_back(input.begin(), input.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const DenseLayer& layer = net.layers[l];
    std::vector<double> z(layer.weight.rows(), 0.0);
    kern::matvec(layer.weight.data.data(), trace.acts.back().data(),
                 layer.bias.data.data(), z.data(), layer.weight.rows(),
                 layer.weight.cols());
    trace.pre.push_back(z);
    if (l + 1 < net.layers.size()) apply_activation(net.activation, z);
    trace.acts.push_back(std::move(z));
  }
  return trace.acts.back();
}

MlpVjp mlp_vjp_with_trace(const Mlp& net, const MlpTrace& trace,
                          std::span<const double> cotangent) {
  if (cotangent.size() != net.output_width()) {
    throw std::invalid_argument("mlp_vjp: cotangent width mismatch");
  }
  MlpVjp out;
  out.param_grad.assign(net.parameter_count(), 0.0);

  // Flat offsets of each layer's weight block.
  std::vector<std::size_t> offsets(net.layers.size(), 0);
  {
    std::size_t off = 0;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      offsets[l] = off;
      off += net.layers[l].weight.size() + net.layers[l].bias.size();
    }
  }

  std::vector<double> delta(cotangent.begin(), cotangent.end());
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const DenseLayer& layer = net.layers[li];
    const std::size_t rows = layer.weight.rows();
    const std::size_t cols = layer.weight.cols();
    const std::vector<double>& below = trace.acts[li];

    double* dw = out.param_grad.data() + offsets[li];
    double* db = dw + layer.weight.size();
    for (std::size_t r = 0; r < rows; ++r) {
      kern::axpy(delta[r], below.data(), dw + r * cols, cols);
      db[r] += delta[r];
    }

    std::vector<double> prev(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      kern::axpy(delta[r], layer.weight.data.data() + r * cols, prev.data(),
                 cols);
    }
    if (li > 0) {
      const std::vector<double>& z = trace.pre[li - 1];
      const std::vector<double>& a = trace.acts[li];
      for (std::size_t c = 0; c < cols; ++c) {
        prev[c] *= activation_deriv(net.activation, z[c], a[c]);
      }
    }
    delta.swap(prev);
  }
  out.input_grad = std::move(delta);
  return out;
}

MlpVjp mlp_vjp(const Mlp& net, std::span<const double> input,
               std::span<const double> cotangent) {
  MlpTrace trace;
  mlp_forward_trace(net, input, trace);
  return mlp_vjp_with_trace(net, trace, cotangent);
}

MlpJacobian mlp_gradient(const Mlp& net, std::span<const double> input) {
  MlpTrace trace;
  mlp_forward_trace(net, input, trace);
  const std::size_t m = net.output_width();
  const std::size_t w = net.input_width();
  const std::size_t p = net.parameter_count();
  MlpJacobian jac;
  jac.input_jacobian = DenseArray::zeros({m, w});
  jac.param_jacobian = DenseArray::zeros({m, p});
  std::vector<double> basis(m, 0.0);
  for (std::size_t c = 0; c < m; ++c) {
    basis[c] = 1.0;
    MlpVjp v = mlp_vjp_with_trace(net, trace, basis);
    basis[c] = 0.0;
    std::copy(v.input_grad.begin(), v.input_grad.end(),
              jac.input_jacobian.data.begin() + c * w);
    std::copy(v.param_grad.begin(), v.param_grad.end(),
              jac.param_jacobian.data.begin() + c * p);
  }
  return jac;
}

std::vector<double> flatten_params(const Mlp& net) {
  std::vector<double> flat;
  flat.reserve(net.parameter_count());
  for (const DenseLayer& layer : net.layers) {
    flat.insert(flat.end(), layer.weight.data.begin(), layer.weight.data.end());
    flat.insert(flat.end(), layer.bias.data.begin(), layer.bias.data.end());
  }
  return flat;
}

void set_params(Mlp& net, std::span<const double> params) {
  if (params.size() != net.parameter_count()) {
    throw std::invalid_argument("set_params: parameter count mismatch");
  }
  std::size_t off = 0;
  for (DenseLayer& layer : net.layers) {
    std::memcpy(layer.weight.data.data(), params.data() + off,
                layer.weight.size() * sizeof(double));
    off += layer.weight.size();
    std::memcpy(layer.bias.data.data(), params.data() + off,
                layer.bias.size() * sizeof(double));
    off += layer.bias.size();
  }
}

bool is_affine(const Mlp& net) {
  return net.layers.size() == 1 || net.activation == Activation::Identity;
}

}  // namespace poolbound
