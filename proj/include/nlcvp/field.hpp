#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nlcvp {

enum class Regularity { c2_bounded, p1_discrete, analytic_test };

const char* to_string(Regularity r) noexcept;

/// Where a field is (effectively) nonzero. Effective support means the field is
/// below 1e-300 outside [lo, hi], which is treated as exact zero.
struct Support {
  bool compact = false;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static Support global() { return {}; }
  static Support interval(double lo, double hi) { return {true, lo, hi}; }
};

/// A real function on the line together with the metadata the quadrature
/// routines need: an accurate increment u(x+h) - u(x) (so second differences
/// do not cancel near h = 0), points of reduced smoothness, support, period.
class ScalarField {
 public:
  using Fn = std::function<double(double)>;
  using Increment = std::function<double(double, double)>;

  ScalarField() = default;
  ScalarField(Fn value, Regularity reg = Regularity::c2_bounded, Support support = Support::global());

  double operator()(double x) const { return (*value_)(x); }
  /// u(x + h) - u(x)
  double delta(double x, double h) const;
  /// u(x + h) + u(x - h) - 2 u(x)
  double second_diff(double x, double h) const { return delta(x, h) + delta(x, -h); }

  Regularity regularity() const noexcept { return regularity_; }
  const Support& support() const noexcept { return support_; }
  const std::vector<double>& breakpoints() const noexcept { return breaks_; }
  std::optional<double> period() const noexcept { return period_; }
  bool bounded() const noexcept { return bounded_; }
  bool is_constant() const noexcept { return constant_; }
  const std::string& name() const noexcept { return name_; }
  explicit operator bool() const noexcept { return static_cast<bool>(value_); }

  ScalarField& with_increment(Increment inc);
  ScalarField& with_breakpoints(std::vector<double> b);
  ScalarField& with_period(double T);
  ScalarField& with_name(std::string n);
  ScalarField& unbounded();
  ScalarField& constant_flag();

  /// x -> u(x - t)
  ScalarField shifted(double t) const;

 private:
  std::shared_ptr<const Fn> value_;
  std::shared_ptr<const Increment> increment_;
  Regularity regularity_ = Regularity::c2_bounded;
  Support support_;
  std::vector<double> breaks_;
  std::optional<double> period_;
  bool bounded_ = true;
  bool constant_ = false;
  std::string name_ = "field";
};

/// a u + b w
ScalarField linear_combination(double a, const ScalarField& u, double b, const ScalarField& w);
/// pointwise product
ScalarField product(const ScalarField& u, const ScalarField& w);

/// Built-in function catalog (also the CLI's function vocabulary).
namespace catalog {

ScalarField constant(double c);
/// c x^k
ScalarField monomial(int k, double c = 1.0);
/// sin(freq x + phase)
ScalarField sine(double freq, double phase = 0.0);
/// cos(freq x + phase)
ScalarField cosine(double freq, double phase = 0.0);
/// exp(-((x - center) / width)^2)
ScalarField gaussian(double center = 0.0, double width = 1.0);
/// exp(1 - 1 / (1 - r^2)) for |r| < 1, r = (x - center) / radius; C-infinity, compact.
ScalarField bump(double center = 0.0, double radius = 1.0);
/// (1 - r^2)_+^s, r = (x - center) / radius.
ScalarField getoor(double s, double center = 0.0, double radius = 1.0);

}  // namespace catalog

}  // namespace nlcvp
