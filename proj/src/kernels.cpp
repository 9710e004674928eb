#include "poolbound/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace poolbound::kern {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sqdist_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_scalar(const double* w, const double* x, const double* bias,
                   double* out, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = bias[r] + dot_scalar(w + r * cols, x, cols);
  }
}

const Table kScalar = {dot_scalar, sqdist_scalar, axpy_scalar, matvec_scalar,
                       "scalar"};

const Table* resolve() {
  const Table* avx2 = avx2_table();
  const char* req = std::getenv("POOLBOUND_KERNEL");
  if (req != nullptr) {
    if (std::strcmp(req, "scalar") == 0) return &kScalar;
    if (std::strcmp(req, "avx2") == 0 && avx2 != nullptr) return avx2;
    return &kScalar;
  }
  return avx2 != nullptr ? avx2 : &kScalar;
}

}  // namespace

const Table& scalar_table() { return kScalar; }

#if !defined(POOLBOUND_HAVE_AVX2)
const Table* avx2_table() { return nullptr; }
#endif

const Table& active() {
  static const Table* chosen = resolve();
  return *chosen;
}

double nrm2sq(const double* a, std::size_t n) { return dot(a, a, n); }

}  // namespace poolbound::kern
