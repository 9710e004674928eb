#pragma once

#include <cstddef>

// Dense double-precision primitives behind a runtime-selected kernel table.
// The scalar lane is the reference implementation; vector lanes must agree
// with it up to accumulation-order rounding (equivalence-tested).
// Transcendentals (tanh etc.) are evaluated with libm on every lane so lane
// selection never changes activation values.
namespace poolbound::kern {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sqdist)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  // out = W x + bias, W row-major rows x cols
  void (*matvec)(const double*, const double*, const double*, double*,
                 std::size_t, std::size_t);
  const char* name;
};

const Table& scalar_table();
// nullptr when this build or CPU lacks AVX2+FMA.
const Table* avx2_table();
// Resolved once per process. Environment POOLBOUND_KERNEL=scalar|avx2
// overrides the CPU-feature default; an unsatisfiable request falls back to
// scalar.
const Table& active();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline double sqdist(const double* a, const double* b, std::size_t n) {
  return active().sqdist(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void matvec(const double* w, const double* x, const double* bias,
                   double* out, std::size_t rows, std::size_t cols) {
  active().matvec(w, x, bias, out, rows, cols);
}

double nrm2sq(const double* a, std::size_t n);

}  // namespace poolbound::kern
