#include "nlcvp/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlcvp/errors.hpp"
#include "nlcvp/quadrature.hpp"

namespace nlcvp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integral over z in (0, inf) of G(z) nu(z) where G(z) = O(z^2) at the origin.
struct ZIntegrand {
  std::function<double(double)> G;
  std::vector<double> breaks;  // z where G loses smoothness
  double settle = kInf;        // G(z) == far_const for z > settle
  double far_const = 0.0;
  std::function<double(double)> far_osc;  // with settle == inf: G = far_const + far_osc beyond the breaks
  double chunk = 0.0;                     // half period of far_osc
};

double z_integral(const KernelSpec& k, ZIntegrand P, double rel_tol) {
  const double R = k.support_radius();
  if (std::isfinite(P.settle)) P.breaks.push_back(P.settle);
  for (double b : k.breakpoints()) P.breaks.push_back(b);
  std::sort(P.breaks.begin(), P.breaks.end());
  P.breaks.erase(std::remove_if(P.breaks.begin(), P.breaks.end(), [](double b) { return !(b > 0.0); }),
                 P.breaks.end());
  P.breaks.erase(std::unique(P.breaks.begin(), P.breaks.end()), P.breaks.end());

  double c = 1.0;
  if (!P.breaks.empty()) c = std::min(c, P.breaks.front());
  if (P.chunk > 0.0) c = std::min(c, P.chunk);
  c = std::min(c, R);

  const auto& G = P.G;
  double total = k.integrate_against(
      [&G](double z) { return z == 0.0 ? 0.0 : G(z) / (z * z); }, 2.0, 0.0, c, rel_tol);
  if (R <= c) return total;

  auto mid = [&](double lo, double hi) {
    double s = 0.0;
    double prev = lo;
    std::vector<double> cuts;
    for (double b : P.breaks) {
      if (b > lo && b < hi) cuts.push_back(b);
    }
    if (P.chunk > 0.0 && std::isfinite(hi)) {
      for (double x = lo + P.chunk; x < hi; x += P.chunk) cuts.push_back(x);
      std::sort(cuts.begin(), cuts.end());
    }
    cuts.push_back(hi);
    for (double x : cuts) {
      if (x > prev) s += k.integrate_against(G, 0.0, prev, x, rel_tol);
      prev = std::max(prev, x);
    }
    return s;
  };

  if (std::isfinite(P.settle)) {
    const double end = std::min(P.settle, R);
    if (end > c) total += mid(c, end);
    if (R > P.settle && P.far_const != 0.0) total += P.far_const * k.radial_tail(std::max(P.settle, c));
    return total;
  }
  if (std::isfinite(R)) return total + mid(c, R);

  double B = c;
  if (!P.breaks.empty()) B = std::max(B, P.breaks.back());
  if (B > c) total += mid(c, B);
  if (P.far_osc) {
    if (P.far_const != 0.0) total += P.far_const * k.radial_tail(B);
    const auto& osc = P.far_osc;
    total += quad::integrate_oscillatory_tail([&](double z) { return osc(z) * k.density(z); }, B, P.chunk,
                                              {1e-15, rel_tol, 4000});
    return total;
  }
  return total + k.integrate_against(G, 0.0, B, kInf, rel_tol);
}

void add_distances(std::vector<double>& out, const ScalarField& u, double x) {
  for (double b : u.breakpoints()) out.push_back(std::abs(b - x));
  if (u.support().compact) {
    out.push_back(std::abs(u.support().lo - x));
    out.push_back(std::abs(u.support().hi - x));
  }
}

double settle_distance(const ScalarField& u, double x) {
  if (u.is_constant()) return 0.0;
  if (!u.support().compact) return kInf;
  return std::max(std::abs(x - u.support().lo), std::abs(x - u.support().hi));
}

void require_pointwise(const KernelSpec& k, const ScalarField& u, const char* who) {
  if (u.regularity() == Regularity::p1_discrete) {
    throw Error(ErrorKind::regularity,
                std::string(who) + ": pointwise evaluation needs a C2 field; P1 fields have kinks at the nodes");
  }
  if (!u.bounded() && !std::isfinite(k.support_radius())) {
    throw Error(ErrorKind::regularity, std::string(who) + ": unbounded field against a kernel with infinite support");
  }
}

}  // namespace

double apply_L(const KernelSpec& k, const ScalarField& u, double x, double rel_tol) {
  require_pointwise(k, u, "apply_L");
  if (u.is_constant()) return 0.0;
  for (double b : u.breakpoints()) {
    if (b == x) throw Error(ErrorKind::regularity, "apply_L: evaluation point sits on a non-smooth point of u");
  }
  ZIntegrand P;
  P.G = [&u, x](double z) { return u.second_diff(x, z); };
  add_distances(P.breaks, u, x);
  const double ux = u(x);
  P.far_const = -2.0 * ux;
  P.settle = settle_distance(u, x);
  if (!std::isfinite(P.settle) && u.period()) {
    P.chunk = 0.5 * *u.period();
    P.far_osc = [&u, x](double z) { return u(x + z) + u(x - z); };
  }
  return -z_integral(k, std::move(P), rel_tol);
}

double apply_N(const KernelSpec& k, const Interval& omega, const ScalarField& u, double y, double rel_tol) {
  if (!(omega.hi > omega.lo)) throw Error(ErrorKind::domain, "apply_N: empty interval");
  if (y >= omega.lo && y <= omega.hi) {
    throw Error(ErrorKind::singular_evaluation, "apply_N: y lies in the closure of the domain");
  }
  if (u.is_constant()) return 0.0;
  const double sgn = (y < omega.lo) ? 1.0 : -1.0;
  const double zlo = (y < omega.lo) ? omega.lo - y : y - omega.hi;
  const double zhi = zlo + omega.length();
  const double zend = std::min(zhi, k.support_radius());
  if (!(zend > zlo)) return 0.0;
  std::vector<double> cuts;
  for (double b : k.breakpoints()) cuts.push_back(b);
  add_distances(cuts, u, y);
  std::sort(cuts.begin(), cuts.end());
  auto G = [&u, y, sgn](double z) { return u.delta(y, sgn * z); };
  double total = 0.0;
  double prev = zlo;
  cuts.push_back(zend);
  for (double c : cuts) {
    if (c <= prev || c > zend) continue;
    total += k.integrate_against(G, 0.0, prev, c, rel_tol);
    prev = c;
  }
  return total;
}

double energy_form(const KernelSpec& k, const Interval& omega, const ScalarField& u, const ScalarField& v,
                   double rel_tol) {
  if (u.is_constant() || v.is_constant()) return 0.0;
  require_pointwise(k, u, "energy_form");
  require_pointwise(k, v, "energy_form");
  if (!u.support().compact || !v.support().compact) {
    throw Error(ErrorKind::precondition, "energy_form: fields must be compactly supported or constant");
  }
  const double a = omega.lo;
  const double b = omega.hi;
  auto F = [&](double x) {
    ZIntegrand P;
    P.G = [&, x](double z) {
      const double wp = (x + z < b) ? 0.5 : 1.0;
      const double wm = (x - z > a) ? 0.5 : 1.0;
      return wp * u.delta(x, z) * v.delta(x, z) + wm * u.delta(x, -z) * v.delta(x, -z);
    };
    P.breaks = {b - x, x - a};
    add_distances(P.breaks, u, x);
    add_distances(P.breaks, v, x);
    P.settle = std::max({settle_distance(u, x), settle_distance(v, x), b - x, x - a});
    P.far_const = 2.0 * u(x) * v(x);
    return z_integral(k, std::move(P), rel_tol);
  };
  std::vector<double> xb = u.breakpoints();
  xb.insert(xb.end(), v.breakpoints().begin(), v.breakpoints().end());
  return quad::integrate_pieces(F, a, b, xb, {1e-14, rel_tol * 10, 4000});
}

GreenGaussTerms green_gauss_terms(const KernelSpec& k, const Interval& omega, const ScalarField& u,
                                  const ScalarField& v, double collar) {
  if (!(collar > 0.0)) throw Error(ErrorKind::domain, "green_gauss: collar must be positive");
  const double a = omega.lo;
  const double b = omega.hi;
  // outer quadratures run looser than the inner ones they wrap
  const quad::Options opt{1e-13, 1e-8, 4000};
  constexpr double kInner = 1e-10;
  GreenGaussTerms t;
  std::vector<double> xb = u.breakpoints();
  xb.insert(xb.end(), v.breakpoints().begin(), v.breakpoints().end());
  t.lhs = quad::integrate_pieces([&](double x) { return apply_L(k, u, x, kInner) * v(x); }, a, b, xb, opt);
  t.energy = energy_form(k, omega, u, v, kInner);

  // complement: y = a - s^2 and y = b + s^2 remove the endpoint singularity of Nu
  double left_len = collar;
  double right_len = collar;
  bool infinite = false;
  if (v.support().compact) {
    left_len = std::min(collar, std::max(0.0, a - v.support().lo));
    right_len = std::min(collar, std::max(0.0, v.support().hi - b));
  } else {
    infinite = true;
  }
  auto side = [&](double sign, double len) {
    if (len <= 0.0) return 0.0;
    const double edge = sign < 0 ? a : b;
    auto g = [&](double s) {
      if (s == 0.0) return 0.0;
      const double y = edge + sign * s * s;
      return 2.0 * s * apply_N(k, omega, u, y, kInner) * v(y);
    };
    const double cap = infinite ? 1.0 : len;
    double val = quad::integrate(g, 0.0, std::sqrt(cap), opt);
    if (infinite) {
      val += quad::integrate_log_tail(
          [&](double t) {
            const double y = edge + sign * t;
            return apply_N(k, omega, u, y, kInner) * v(y);
          },
          1.0, opt);
    }
    return val;
  };
  t.complement = side(-1.0, left_len) + side(1.0, right_len);
  t.residual = std::abs(t.lhs - t.energy - t.complement);
  return t;
}

double green_gauss_residual(const KernelSpec& k, const Interval& omega, const ScalarField& u, const ScalarField& v,
                            double collar) {
  return green_gauss_terms(k, omega, u, v, collar).residual;
}

}  // namespace nlcvp
