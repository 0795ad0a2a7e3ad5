#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlcvp {

enum class ErrorKind {
  domain,               // parameter outside the admissible range
  pole,                 // Gamma evaluated at a non-positive integer
  non_integrable,       // kernel fails p-Levy integrability / form not finite
  quadrature,           // quadrature did not converge
  singular_system,      // linear system or eigensolver breakdown
  incompatible,         // Neumann data violates the compatibility condition
  resonance,            // Helmholtz / DtN parameter hits the spectrum
  precondition,         // problem data violates a well-posedness hypothesis
  singular_evaluation,  // evaluation point meets the kernel singularity
  regularity,           // function class too rough for the requested operation
  mesh_mismatch,
  config,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class IncompatibleDataError : public Error {
 public:
  IncompatibleDataError(double residual, double tolerance);
  double residual() const noexcept { return residual_; }
  double tolerance() const noexcept { return tolerance_; }

 private:
  double residual_;
  double tolerance_;
};

class ResonanceError : public Error {
 public:
  ResonanceError(std::size_t eigen_index, double eigenvalue, double projection_norm);
  std::size_t eigen_index() const noexcept { return index_; }
  double eigenvalue() const noexcept { return eigenvalue_; }
  double projection_norm() const noexcept { return projection_; }

 private:
  std::size_t index_;
  double eigenvalue_;
  double projection_;
};

}  // namespace nlcvp
