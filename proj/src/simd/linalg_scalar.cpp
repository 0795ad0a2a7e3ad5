#include "nlcvp/simd/linalg.hpp"

namespace nlcvp::simd {

namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void gemv(const double* A, std::size_t rows, std::size_t cols, std::size_t lda, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = 0.0;
  for (std::size_t j = 0; j < cols; ++j) axpy(x[j], A + j * lda, y, rows);
}

void gemv_t(const double* A, std::size_t rows, std::size_t cols, std::size_t lda, const double* x, double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = dot(A + j * lda, x, rows);
}

double quad_form(const double* A, std::size_t n, std::size_t lda, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += y[j] * dot(A + j * lda, x, n);
  return s;
}

}  // namespace

const Kernels& scalar_kernels() noexcept {
  static const Kernels k{dot, axpy, gemv, gemv_t, quad_form};
  return k;
}

}  // namespace nlcvp::simd
