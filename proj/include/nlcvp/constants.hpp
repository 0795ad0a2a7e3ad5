#pragma once

#include <optional>
#include <string>

namespace nlcvp::constants {

/// Euler Gamma function. Lanczos approximation for x >= 1/2, reflection below.
/// Throws ErrorKind::pole at non-positive integers.
double gamma_fn(double x);

/// Norming constant of the fractional Laplacian,
/// C_{d,alpha} = 2^alpha Gamma((d+alpha)/2) / (pi^{d/2} |Gamma(-alpha/2)|).
double frac_norming_constant(int d, double alpha);

/// Spherical average of |w.e|^p over S^{d-1}.
double bbm_constant(int d, double p);

/// Surface measure of the unit sphere S^{d-1}.
double sphere_area(int d);

/// Riesz potential constant pi^{d/2-a} Gamma(d/2) / Gamma((d-a)/2), in the form
/// used throughout this library (it differs from the textbook normalization,
/// which carries Gamma(a/2) and 2^a factors).
double riesz_constant(int d, double a);

/// a_{d,alpha} = alpha (p - alpha) / (p |S^{d-1}|): makes |h|^{-d-alpha} a
/// unit-mass p-Levy kernel.
double stable_normalization(int d, double alpha, double p = 2.0);

/// Quadrature value of the integral of (1 - cos t) |t|^{-1-alpha} over the real
/// line, i.e. 1 / C_{1,alpha}. Independent of the Gamma route.
double frac_norming_integral_1d(double alpha);

struct ConstantReport {
  std::string name;
  int d = 1;
  double parameter = 0.0;
  double value = 0.0;
  std::optional<double> quadrature_value;
  std::optional<double> abs_gap;
};

/// C_{1,alpha} together with the reciprocal of its quadrature integral and the
/// absolute gap between the two.
ConstantReport norming_constant_report(int d, double alpha);

}  // namespace nlcvp::constants
