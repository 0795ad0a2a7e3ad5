#pragma once

#include "nlcvp/field.hpp"
#include "nlcvp/kernels.hpp"

namespace nlcvp {

/// Lu(x) = -1/2 * integral of (u(x+h) + u(x-h) - 2u(x)) nu(h) dh.
/// Rejects P1-discrete fields; rel_tol applies to each quadrature piece.
double apply_L(const KernelSpec& k, const ScalarField& u, double x, double rel_tol = 1e-10);

/// Nu(y) = integral over omega of (u(x) - u(y)) nu(x - y) dx, y outside the
/// closed interval.
double apply_N(const KernelSpec& k, const Interval& omega, const ScalarField& u, double y, double rel_tol = 1e-10);

/// E(u, v) = 1/2 double integral over (Omega^c x Omega^c)^c of
/// (u(x) - u(y)) (v(x) - v(y)) nu(x - y). Needs u and v compactly supported
/// (effective support is fine) unless one of them is constant.
double energy_form(const KernelSpec& k, const Interval& omega, const ScalarField& u, const ScalarField& v,
                   double rel_tol = 1e-10);

/// Parts of the nonlocal integration-by-parts identity, each by its own
/// quadrature route.
struct GreenGaussTerms {
  double lhs = 0.0;         // integral over omega of (Lu) v
  double energy = 0.0;      // E(u, v)
  double complement = 0.0;  // integral over the complement of (Nu) v
  double residual = 0.0;    // |lhs - energy - complement|
};

/// With N as defined by apply_N (inside value minus outside value), the
/// identity reads  int_Omega (Lu) v = E(u, v) + int_{Omega^c} (Nu) v.
/// The complement integral runs over the collar [a - collar, a) U (b, b + collar]
/// intersected with the support of v; for non-compact v it runs to infinity.
GreenGaussTerms green_gauss_terms(const KernelSpec& k, const Interval& omega, const ScalarField& u,
                                  const ScalarField& v, double collar);

double green_gauss_residual(const KernelSpec& k, const Interval& omega, const ScalarField& u, const ScalarField& v,
                            double collar);

}  // namespace nlcvp
