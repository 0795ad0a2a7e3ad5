#pragma once

#include <functional>
#include <span>
#include <vector>

namespace nlcvp::quad {

using Integrand = std::function<double(double)>;

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]. Cached; safe to call concurrently.
const Rule& gauss_legendre(int n);

/// n-point Gauss rule for the weight t^gamma on [0, 1], gamma > -1
/// (Golub-Welsch on the Jacobi recurrence).
const Rule& gauss_jacobi_unit(int n, double gamma);

template <class F>
double gauss(F&& f, double a, double b, int n) {
  const Rule& r = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
  return s * half;
}

struct Options {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  int max_intervals = 4000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Globally adaptive Gauss-Kronrod (7/15) on a finite interval.
Result adaptive(const Integrand& f, double a, double b, const Options& opt = {});

/// adaptive() that throws ErrorKind::quadrature when the tolerance is missed.
double integrate(const Integrand& f, double a, double b, const Options& opt = {});

/// Sums integrate() over the pieces delimited by sorted, de-duplicated breaks
/// clipped to [a, b].
double integrate_pieces(const Integrand& f, double a, double b, std::vector<double> breaks,
                        const Options& opt = {});

/// Integral of g(z) z^gamma over [0, b] for smooth g, gamma > -1. Gauss-Jacobi
/// with recursive splitting toward the origin until two rule orders agree.
double integrate_power_origin(const Integrand& g, double b, double gamma, const Options& opt = {});

/// Integral of f over [r0, inf) through z = r0 e^s, advancing in unit s-chunks
/// until the chunk contributions fall below tolerance. Suited to algebraic decay.
double integrate_log_tail(const Integrand& f, double r0, const Options& opt = {});

/// Limit estimate of a sequence of partial sums by the Wynn epsilon algorithm.
double wynn_epsilon(std::span<const double> partial_sums);

/// Oscillatory tail: sum of integrals over consecutive chunks
/// [r0 + k L, r0 + (k+1) L], accelerated with wynn_epsilon.
double integrate_oscillatory_tail(const Integrand& f, double r0, double chunk, const Options& opt = {});

}  // namespace nlcvp::quad
