#include "nlcvp/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nlcvp/errors.hpp"

namespace nlcvp {

const char* to_string(Regularity r) noexcept {
  switch (r) {
    case Regularity::c2_bounded: return "C2-bounded";
    case Regularity::p1_discrete: return "P1-discrete";
    case Regularity::analytic_test: return "analytic-test";
  }
  return "unknown";
}

ScalarField::ScalarField(Fn value, Regularity reg, Support support)
    : value_(std::make_shared<const Fn>(std::move(value))), regularity_(reg), support_(support) {
  if (!*value_) throw Error(ErrorKind::domain, "ScalarField: empty evaluation handle");
}

double ScalarField::delta(double x, double h) const {
  if (constant_) return 0.0;
  if (increment_) return (*increment_)(x, h);
  return (*value_)(x + h) - (*value_)(x);
}

ScalarField& ScalarField::with_increment(Increment inc) {
  increment_ = std::make_shared<const Increment>(std::move(inc));
  return *this;
}

ScalarField& ScalarField::with_breakpoints(std::vector<double> b) {
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  breaks_ = std::move(b);
  return *this;
}

ScalarField& ScalarField::with_period(double T) {
  period_ = T;
  return *this;
}

ScalarField& ScalarField::with_name(std::string n) {
  name_ = std::move(n);
  return *this;
}

ScalarField& ScalarField::unbounded() {
  bounded_ = false;
  return *this;
}

ScalarField& ScalarField::constant_flag() {
  constant_ = true;
  return *this;
}

ScalarField ScalarField::shifted(double t) const {
  ScalarField out = *this;
  auto v = value_;
  out.value_ = std::make_shared<const Fn>([v, t](double x) { return (*v)(x - t); });
  if (increment_) {
    auto inc = increment_;
    out.increment_ = std::make_shared<const Increment>([inc, t](double x, double h) { return (*inc)(x - t, h); });
  }
  if (support_.compact) out.support_ = Support::interval(support_.lo + t, support_.hi + t);
  for (double& b : out.breaks_) b += t;
  out.name_ = name_ + " shifted";
  return out;
}

namespace {

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

Regularity weaker(Regularity a, Regularity b) {
  if (a == Regularity::p1_discrete || b == Regularity::p1_discrete) return Regularity::p1_discrete;
  if (a == Regularity::c2_bounded || b == Regularity::c2_bounded) return Regularity::c2_bounded;
  return Regularity::analytic_test;
}

std::optional<double> common_period(const ScalarField& u, const ScalarField& w) {
  const auto pu = u.period();
  const auto pw = w.period();
  if (u.is_constant()) return pw;
  if (w.is_constant()) return pu;
  if (pu && pw) {
    const double big = std::max(*pu, *pw);
    const double small = std::min(*pu, *pw);
    const double ratio = big / small;
    if (std::abs(ratio - std::round(ratio)) < 1e-12 * ratio) return big;
  }
  return std::nullopt;
}

}  // namespace

ScalarField linear_combination(double a, const ScalarField& u, double b, const ScalarField& w) {
  Support s = Support::global();
  if (u.support().compact && w.support().compact) {
    s = Support::interval(std::min(u.support().lo, w.support().lo), std::max(u.support().hi, w.support().hi));
  }
  ScalarField out([u, w, a, b](double x) { return a * u(x) + b * w(x); }, weaker(u.regularity(), w.regularity()),
                  s);
  out.with_increment([u, w, a, b](double x, double h) { return a * u.delta(x, h) + b * w.delta(x, h); });
  out.with_breakpoints(merged(u.breakpoints(), w.breakpoints()));
  if (auto T = common_period(u, w)) out.with_period(*T);
  if (!u.bounded() || !w.bounded()) out.unbounded();
  if (u.is_constant() && w.is_constant()) out.constant_flag();
  out.with_name(u.name() + "+" + w.name());
  return out;
}

ScalarField product(const ScalarField& u, const ScalarField& w) {
  Support s = Support::global();
  if (u.support().compact && w.support().compact) {
    s = Support::interval(std::max(u.support().lo, w.support().lo), std::min(u.support().hi, w.support().hi));
    if (s.hi < s.lo) s.hi = s.lo;
  } else if (u.support().compact) {
    s = u.support();
  } else if (w.support().compact) {
    s = w.support();
  }
  ScalarField out([u, w](double x) { return u(x) * w(x); }, weaker(u.regularity(), w.regularity()), s);
  // (uw)(x+h) - (uw)(x) = du * w(x+h) + u(x) * dw
  out.with_increment([u, w](double x, double h) {
    const double ux = u(x);
    const double wx = w(x);
    if (ux == 0.0 || wx == 0.0) return u(x + h) * w(x + h);
    return u.delta(x, h) * w(x + h) + ux * w.delta(x, h);
  });
  out.with_breakpoints(merged(u.breakpoints(), w.breakpoints()));
  if (!s.compact) {
    if (auto T = common_period(u, w)) out.with_period(*T);
  }
  const bool bounded = (u.bounded() && w.bounded()) || s.compact;
  if (!bounded) out.unbounded();
  if (u.is_constant() && w.is_constant()) out.constant_flag();
  out.with_name(u.name() + "*" + w.name());
  return out;
}

namespace catalog {

ScalarField constant(double c) {
  ScalarField f([c](double) { return c; }, Regularity::analytic_test);
  f.constant_flag().with_name("constant");
  return f;
}

ScalarField monomial(int k, double c) {
  if (k < 0) throw Error(ErrorKind::domain, "monomial: degree must be non-negative");
  if (k == 0) return constant(c);
  ScalarField f([k, c](double x) { return c * std::pow(x, k); }, Regularity::analytic_test);
  // binomial expansion: c sum_{j>=1} C(k,j) x^{k-j} h^j, no cancellation in h
  f.with_increment([k, c](double x, double h) {
    double s = 0.0;
    double binom = 1.0;
    for (int j = 1; j <= k; ++j) {
      binom = binom * (k - j + 1) / j;
      s += binom * std::pow(x, k - j) * std::pow(h, j);
    }
    return c * s;
  });
  f.with_name("monomial");
  if (k >= 1) f.unbounded();
  return f;
}

ScalarField sine(double freq, double phase) {
  ScalarField f([freq, phase](double x) { return std::sin(freq * x + phase); }, Regularity::analytic_test);
  f.with_increment([freq, phase](double x, double h) {
    return 2.0 * std::cos(freq * x + phase + 0.5 * freq * h) * std::sin(0.5 * freq * h);
  });
  if (freq != 0.0) f.with_period(2.0 * std::numbers::pi / std::abs(freq));
  if (freq == 0.0) f.constant_flag();
  f.with_name("sin");
  return f;
}

ScalarField cosine(double freq, double phase) {
  ScalarField f([freq, phase](double x) { return std::cos(freq * x + phase); }, Regularity::analytic_test);
  f.with_increment([freq, phase](double x, double h) {
    return -2.0 * std::sin(freq * x + phase + 0.5 * freq * h) * std::sin(0.5 * freq * h);
  });
  if (freq != 0.0) f.with_period(2.0 * std::numbers::pi / std::abs(freq));
  if (freq == 0.0) f.constant_flag();
  f.with_name("cos");
  return f;
}

ScalarField gaussian(double center, double width) {
  if (!(width > 0.0)) throw Error(ErrorKind::domain, "gaussian: width must be positive");
  // exp(-y^2) < 1e-300 beyond |y| = 26.3
  constexpr double kReach = 26.5;
  ScalarField f(
      [center, width](double x) {
        const double y = (x - center) / width;
        return std::exp(-y * y);
      },
      Regularity::analytic_test, Support::interval(center - kReach * width, center + kReach * width));
  f.with_increment([center, width](double x, double h) {
    const double y = (x - center) / width;
    const double t = h / width;
    const double e = -t * (2.0 * y + t);
    if (e > 0.0) return -std::exp(-(y + t) * (y + t)) * std::expm1(-e);
    return std::exp(-y * y) * std::expm1(e);
  });
  f.with_name("gaussian");
  return f;
}

ScalarField bump(double center, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::domain, "bump: radius must be positive");
  auto phi = [](double r) { return std::abs(r) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0; };
  ScalarField f([=](double x) { return phi((x - center) / radius); }, Regularity::analytic_test,
                Support::interval(center - radius, center + radius));
  f.with_increment([=](double x, double h) {
    const double r = (x - center) / radius;
    const double t = h / radius;
    const double s = r + t;
    const bool in_r = std::abs(r) < 1.0;
    const bool in_s = std::abs(s) < 1.0;
    if (!in_r && !in_s) return 0.0;
    if (!in_r) return phi(s);
    if (!in_s) return -phi(r);
    // phi(s)/phi(r) = exp(-(s^2 - r^2) / ((1 - r^2)(1 - s^2)))
    const double e = -t * (r + s) / ((1.0 - r * r) * (1.0 - s * s));
    if (e > 0.0) return -phi(s) * std::expm1(-e);
    return phi(r) * std::expm1(e);
  });
  f.with_breakpoints({center - radius, center + radius});
  f.with_name("bump");
  return f;
}

ScalarField getoor(double s, double center, double radius) {
  if (!(s > 0.0)) throw Error(ErrorKind::domain, "getoor: exponent must be positive");
  if (!(radius > 0.0)) throw Error(ErrorKind::domain, "getoor: radius must be positive");
  auto prof = [s](double r) { return std::abs(r) < 1.0 ? std::pow(1.0 - r * r, s) : 0.0; };
  ScalarField f([=](double x) { return prof((x - center) / radius); }, Regularity::analytic_test,
                Support::interval(center - radius, center + radius));
  f.with_increment([=](double x, double h) {
    const double r = (x - center) / radius;
    const double t = h / radius;
    const double q = r + t;
    const bool in_r = std::abs(r) < 1.0;
    const bool in_q = std::abs(q) < 1.0;
    if (!in_r && !in_q) return 0.0;
    if (!in_r) return prof(q);
    if (!in_q) return -prof(r);
    const double base = 1.0 - r * r;
    return std::pow(base, s) * std::expm1(s * std::log1p(-t * (r + q) / base));
  });
  f.with_breakpoints({center - radius, center + radius});
  f.with_name("getoor");
  return f;
}

}  // namespace catalog

}  // namespace nlcvp
