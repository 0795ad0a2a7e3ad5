#include "nlcvp/constants.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "nlcvp/errors.hpp"
#include "nlcvp/quadrature.hpp"

namespace nlcvp::constants {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos g = 7, n = 9 (Godfrey's coefficients).
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

// sin(pi x) with the argument reduced first so that integers give exact zeros.
double sin_pi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0) r += 2.0;
  if (r > 1.0) return -sin_pi(r - 1.0);
  if (r > 0.5) r = 1.0 - r;
  return std::sin(kPi * r);
}

double lanczos(double x) {
  // valid for x >= 1/2
  const double z = x - 1.0;
  double a = kLanczos[0];
  const double t = z + kLanczosG + 0.5;
  for (std::size_t i = 1; i < kLanczos.size(); ++i) a += kLanczos[i] / (z + static_cast<double>(i));
  // t^(z+1/2) split in two to delay overflow near x ~ 171
  const double half = std::pow(t, 0.5 * (z + 0.5));
  return std::sqrt(2.0 * kPi) * half * (half * std::exp(-t)) * a;
}

void require_dimension(int d, const char* who) {
  if (d < 1) throw Error(ErrorKind::domain, std::string(who) + ": dimension must be >= 1");
}

}  // namespace

double gamma_fn(double x) {
  if (std::isnan(x)) throw Error(ErrorKind::domain, "gamma_fn: NaN argument");
  if (x <= 0.0 && x == std::floor(x)) {
    throw Error(ErrorKind::pole, "gamma_fn: pole at non-positive integer " + std::to_string(x));
  }
  if (x < 0.5) {
    // Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return kPi / (sin_pi(x) * lanczos(1.0 - x));
  }
  // small integers exactly
  if (x <= 20.0 && x == std::floor(x)) {
    double f = 1.0;
    for (int k = 2; k < static_cast<int>(x); ++k) f *= k;
    return f;
  }
  return lanczos(x);
}

double frac_norming_constant(int d, double alpha) {
  require_dimension(d, "frac_norming_constant");
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw Error(ErrorKind::domain, "frac_norming_constant: alpha must lie in (0, 2)");
  }
  return std::pow(2.0, alpha) * gamma_fn(0.5 * (d + alpha)) /
         (std::pow(kPi, 0.5 * d) * std::abs(gamma_fn(-0.5 * alpha)));
}

double bbm_constant(int d, double p) {
  require_dimension(d, "bbm_constant");
  if (!(p >= 1.0)) throw Error(ErrorKind::domain, "bbm_constant: p must be >= 1");
  return gamma_fn(0.5 * d) * gamma_fn(0.5 * (p + 1.0)) / (gamma_fn(0.5) * gamma_fn(0.5 * (p + d)));
}

double sphere_area(int d) {
  require_dimension(d, "sphere_area");
  return 2.0 * std::pow(kPi, 0.5 * d) / gamma_fn(0.5 * d);
}

double riesz_constant(int d, double a) {
  require_dimension(d, "riesz_constant");
  if (!(a > 0.0 && a < d)) throw Error(ErrorKind::domain, "riesz_constant: a must lie in (0, d)");
  return std::pow(kPi, 0.5 * d - a) * gamma_fn(0.5 * d) / gamma_fn(0.5 * (d - a));
}

double stable_normalization(int d, double alpha, double p) {
  if (!(alpha > 0.0 && alpha < p)) throw Error(ErrorKind::domain, "stable_normalization: alpha must lie in (0, p)");
  return alpha * (p - alpha) / (p * sphere_area(d));
}

double frac_norming_integral_1d(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw Error(ErrorKind::domain, "frac_norming_integral_1d: alpha must lie in (0, 2)");
  }
  const quad::Options opt{1e-15, 1e-13, 4000};
  // (1 - cos t) = 2 sin^2(t/2); on [0, pi] integrate (2 sin^2(t/2) / t^2) t^{1-alpha}
  const double cut = kPi;
  const double near = quad::integrate_power_origin(
      [](double t) {
        if (t == 0.0) return 0.5;
        const double s = std::sin(0.5 * t);
        return 2.0 * s * s / (t * t);
      },
      cut, 1.0 - alpha, opt);
  // on [pi, inf): t^{-1-alpha} integrates in closed form, the cosine part oscillates
  const double flat = std::pow(cut, -alpha) / alpha;
  const double osc = quad::integrate_oscillatory_tail(
      [alpha](double t) { return std::cos(t) * std::pow(t, -1.0 - alpha); }, cut, kPi, opt);
  return 2.0 * (near + flat - osc);
}

ConstantReport norming_constant_report(int d, double alpha) {
  ConstantReport r;
  r.name = "C_d_alpha";
  r.d = d;
  r.parameter = alpha;
  r.value = frac_norming_constant(d, alpha);
  if (d == 1) {
    const double q = frac_norming_integral_1d(alpha);
    r.quadrature_value = 1.0 / q;
    r.abs_gap = std::abs(r.value - *r.quadrature_value);
  }
  return r;
}

}  // namespace nlcvp::constants
