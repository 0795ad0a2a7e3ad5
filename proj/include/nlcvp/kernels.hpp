#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nlcvp {

enum class KernelFamily { fractional, rescaled, window, log_window, custom };
enum class Normalization { exact_C, stable_a, half_C, unnormalized };

const char* to_string(KernelFamily f) noexcept;
const char* to_string(Normalization n) noexcept;

/// nu(r) = coef * r^exponent for lo <= r < hi (radial variable r = |h|).
struct PowerSegment {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double coef = 1.0;
  double exponent = -2.0;
};

/// Family parameters; the serializable face of a KernelSpec.
struct KernelParams {
  KernelFamily family = KernelFamily::fractional;
  int d = 1;
  double p = 2.0;
  double alpha = 1.0;
  Normalization normalization = Normalization::exact_C;
  double beta = 0.0;
  double eps = 0.1;
  double eps0 = 0.5;
  double scale = 1.0;  // overall multiplier applied after normalization
  std::shared_ptr<const KernelParams> base;  // rescaled family only
};

/// Radial symmetric Levy kernel on the line. Immutable once built.
///
/// Closed-form families are stored as power-law segments, which makes the
/// radial moments and tails exact; custom kernels fall back to quadrature.
class KernelSpec {
 public:
  using Density = std::function<double(double)>;

  static KernelSpec fractional(double alpha, Normalization norm, int d = 1, double p = 2.0);
  static KernelSpec window(double beta, double eps, double p = 2.0, int d = 1);
  static KernelSpec log_window(double eps, double eps0, double p = 2.0, int d = 1);
  static KernelSpec rescaled(const KernelSpec& base, double eps);
  /// density(r) for r > 0; density(r) * r^{1+singular_exponent} must be smooth
  /// on (0, first break].
  static KernelSpec custom(Density density, double singular_exponent, double p, std::vector<double> breaks = {},
                           bool radially_nonincreasing = false, Density radial_tail = nullptr);

  /// The same kernel multiplied by a positive constant.
  KernelSpec scaled(double factor) const;

  double operator()(double h) const { return density(h < 0 ? -h : h); }
  double density(double r) const;

  int d() const noexcept { return params_.d; }
  double p_order() const noexcept { return params_.p; }
  KernelFamily family() const noexcept { return params_.family; }
  const KernelParams& params() const noexcept { return params_; }
  /// sigma with nu(r) ~ r^{-1-sigma} at the origin; -1 for kernels bounded there.
  double singular_exponent() const noexcept { return sigma_; }
  bool radially_nonincreasing() const noexcept { return nonincreasing_; }
  bool closed_form() const noexcept { return !custom_; }
  double support_radius() const noexcept { return support_; }
  const std::vector<PowerSegment>& segments() const noexcept { return segments_; }
  /// Radii where the density is discontinuous or changes formula.
  std::vector<double> breakpoints() const;

  /// One-sided radial moment: integral over [a, b] of r^k nu(r), 0 <= a <= b <= inf.
  double moment(double k, double a, double b) const;
  /// One-sided tail: integral over [r, inf) of nu.
  double radial_tail(double r) const;
  /// Two-sided tail mass R -> integral over |h| > R of nu(h).
  double tail(double R) const { return 2.0 * radial_tail(R); }

  /// Integral over [a, b] (0 <= a < b <= inf) of z^m g(z) nu(z) for smooth g.
  /// m must exceed singular_exponent() when a == 0.
  double integrate_against(const std::function<double(double)>& g, double m, double a, double b,
                           double rel_tol = 1e-12) const;

  std::string describe() const;

 private:
  KernelSpec() = default;
  void finalize();

  KernelParams params_;
  std::vector<PowerSegment> segments_;
  std::shared_ptr<const Density> custom_;
  std::shared_ptr<const Density> custom_tail_;
  std::vector<double> custom_breaks_;
  double sigma_ = 0.0;
  double support_ = std::numeric_limits<double>::infinity();
  bool nonincreasing_ = true;
};

/// Validating factory over KernelParams: parameter-domain checks plus a
/// numerical p-Levy integrability check.
KernelSpec make_kernel(const KernelParams& params);

/// Integral of (1 ^ |h|^p) nu(h) over the line.
double levy_integral(const KernelSpec& k);

/// Integral over |h| >= delta of (1 ^ |h|^p) nu(h).
double concentration_mass(const KernelSpec& k, double delta);

/// psi(xi) = integral of (1 - cos(xi h)) nu(h) dh.
double symbol(const KernelSpec& k, double xi);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x > lo && x < hi; }
};

enum class WeightKind { essinf, integral };

struct WeightSpec {
  KernelSpec kernel;
  Interval K;
  WeightKind kind = WeightKind::essinf;
};

/// Seed for the only randomized step in the library (essinf grid sampling for
/// kernels not declared radially non-increasing): NONLOCAL_CVP_SEED, default 0.
unsigned long long sampling_seed();

/// nu_K(x) (essential infimum over K of nu(x - y)) or the capped integral
/// over K of 1 ^ nu(x - y).
double weight_eval(const WeightSpec& w, double x);

}  // namespace nlcvp
