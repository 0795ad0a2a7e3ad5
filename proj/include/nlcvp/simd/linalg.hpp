#pragma once

#include <cstddef>

namespace nlcvp::simd {

enum class Isa { scalar, avx2, neon };

const char* to_string(Isa isa) noexcept;

/// Dense level-1/2 primitives. Matrices are column-major with leading
/// dimension lda (Eigen's default layout).
struct Kernels {
  double (*dot)(const double* x, const double* y, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// y = A x, A is rows x cols
  void (*gemv)(const double* A, std::size_t rows, std::size_t cols, std::size_t lda, const double* x, double* y);
  /// y = A^T x, A is rows x cols
  void (*gemv_t)(const double* A, std::size_t rows, std::size_t cols, std::size_t lda, const double* x, double* y);
  /// x^T A y for square A of order n
  double (*quad_form)(const double* A, std::size_t n, std::size_t lda, const double* x, const double* y);
};

/// Scalar reference implementation; always available.
const Kernels& scalar_kernels() noexcept;
/// nullptr when the variant is not compiled in or the CPU lacks it.
const Kernels* avx2_kernels() noexcept;
const Kernels* neon_kernels() noexcept;

/// Chosen once at first use: the widest supported variant, unless the
/// environment variable NLCVP_SIMD=scalar forces the reference path.
Isa active_isa() noexcept;
const Kernels& active() noexcept;

}  // namespace nlcvp::simd
