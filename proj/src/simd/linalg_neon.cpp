#include <arm_neon.h>

#include "nlcvp/simd/linalg.hpp"

namespace nlcvp::simd {

namespace {

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t a0 = vdupq_n_f64(0.0);
  float64x2_t a1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 = vfmaq_f64(a0, vld1q_f64(x + i), vld1q_f64(y + i));
    a1 = vfmaq_f64(a1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(a0, a1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
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

const Kernels* neon_kernels() noexcept {
  static const Kernels k{dot, axpy, gemv, gemv_t, quad_form};
  return &k;
}

const Kernels* avx2_kernels() noexcept { return nullptr; }

}  // namespace nlcvp::simd
