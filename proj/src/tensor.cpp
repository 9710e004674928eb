#include "poolbound/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace poolbound {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t p = 1;
  for (std::size_t s : shape) p *= s;
  return p;
}

DenseArray DenseArray::zeros(std::vector<std::size_t> shape) {
  DenseArray a;
  a.data.assign(shape_product(shape), 0.0);
  a.shape = std::move(shape);
  return a;
}

DenseArray DenseArray::vector(std::vector<double> values) {
  DenseArray a;
  a.shape = {values.size()};
  a.data = std::move(values);
  return a;
}

DenseArray DenseArray::matrix(std::size_t rows, std::size_t cols,
                              std::vector<double> values) {
  if (values.size() != rows * cols) {
    throw std::invalid_argument("DenseArray::matrix: size mismatch");
  }
  DenseArray a;
  a.shape = {rows, cols};
  a.data = std::move(values);
  return a;
}

std::size_t DenseArray::rows() const {
  if (shape.size() != 2) throw std::logic_error("DenseArray::rows: not 2-d");
  return shape[0];
}

std::size_t DenseArray::cols() const {
  if (shape.size() != 2) throw std::logic_error("DenseArray::cols: not 2-d");
  return shape[1];
}

bool DenseArray::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_finite(std::span<const double> xs, const std::string& what) {
  for (double v : xs) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(what + ": non-finite entry");
    }
  }
}

void require_finite(const DenseArray& a, const std::string& what) {
  if (!a.all_finite()) {
    throw std::invalid_argument(what + ": non-finite entry");
  }
}

}  // namespace poolbound
