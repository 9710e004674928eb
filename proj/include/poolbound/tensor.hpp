#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace poolbound {

// Row-major dense array of doubles. Shape is metadata; arithmetic goes
// through flat views and the kernel layer.
struct DenseArray {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  DenseArray() = default;

  static DenseArray zeros(std::vector<std::size_t> shape);
  static DenseArray vector(std::vector<double> values);
  static DenseArray matrix(std::size_t rows, std::size_t cols,
                           std::vector<double> values);

  std::size_t size() const { return data.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  double& at2(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at2(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  bool all_finite() const;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

void require_finite(std::span<const double> xs, const std::string& what);
void require_finite(const DenseArray& a, const std::string& what);

}  // namespace poolbound
