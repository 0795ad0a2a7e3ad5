#include "nlcvp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <sstream>

#include "nlcvp/constants.hpp"
#include "nlcvp/errors.hpp"
#include "nlcvp/quadrature.hpp"

namespace nlcvp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOverflowGuard = 1e100;

const quad::Options kTight{1e-15, 1e-12, 4000};

// integral over [a, b] of coef * z^e, 0 <= a < b <= inf
double power_integral(double coef, double e, double a, double b) {
  if (!(b > a)) return 0.0;
  const double q = e + 1.0;
  if (b == kInf) {
    if (q >= 0.0) throw Error(ErrorKind::non_integrable, "kernel tail is not integrable at infinity");
    return coef * std::pow(a, q) / (-q);
  }
  if (a == 0.0) {
    if (q <= 0.0) throw Error(ErrorKind::non_integrable, "kernel moment is not integrable at the origin");
    return coef * std::pow(b, q) / q;
  }
  const double L = std::log(b / a);
  if (q == 0.0) return coef * L;
  return coef * std::pow(a, q) * std::expm1(q * L) / q;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorKind::domain, msg);
}

}  // namespace

const char* to_string(KernelFamily f) noexcept {
  switch (f) {
    case KernelFamily::fractional: return "fractional";
    case KernelFamily::rescaled: return "rescaled";
    case KernelFamily::window: return "window";
    case KernelFamily::log_window: return "log_window";
    case KernelFamily::custom: return "custom";
  }
  return "unknown";
}

const char* to_string(Normalization n) noexcept {
  switch (n) {
    case Normalization::exact_C: return "exact_C";
    case Normalization::stable_a: return "stable_a";
    case Normalization::half_C: return "half_C";
    case Normalization::unnormalized: return "unnormalized";
  }
  return "unknown";
}

KernelSpec KernelSpec::fractional(double alpha, Normalization norm, int d, double p) {
  require(d == 1, "kernels are discretized in dimension 1 only");
  require(p >= 1.0, "p must be >= 1");
  require(alpha > 0.0 && alpha < p, "fractional kernel: alpha must lie in (0, p)");
  double coef = 1.0;
  switch (norm) {
    case Normalization::exact_C: coef = constants::frac_norming_constant(d, alpha); break;
    case Normalization::half_C: coef = 0.5 * constants::frac_norming_constant(d, alpha); break;
    case Normalization::stable_a: coef = constants::stable_normalization(d, alpha, p); break;
    case Normalization::unnormalized: coef = 1.0; break;
  }
  KernelSpec k;
  k.params_.family = KernelFamily::fractional;
  k.params_.d = d;
  k.params_.p = p;
  k.params_.alpha = alpha;
  k.params_.normalization = norm;
  k.segments_.push_back({0.0, kInf, coef, -1.0 - alpha});
  k.finalize();
  return k;
}

KernelSpec KernelSpec::window(double beta, double eps, double p, int d) {
  require(d == 1, "kernels are discretized in dimension 1 only");
  require(p >= 1.0, "p must be >= 1");
  require(beta > -d, "window kernel: beta must exceed -d");
  require(eps > 0.0, "window kernel: eps must be positive");
  const double coef = (d + beta) / (constants::sphere_area(d) * std::pow(eps, d + beta));
  KernelSpec k;
  k.params_.family = KernelFamily::window;
  k.params_.d = d;
  k.params_.p = p;
  k.params_.beta = beta;
  k.params_.eps = eps;
  k.segments_.push_back({0.0, eps, coef, beta - p});
  k.finalize();
  return k;
}

KernelSpec KernelSpec::log_window(double eps, double eps0, double p, int d) {
  require(d == 1, "kernels are discretized in dimension 1 only");
  require(p >= 1.0, "p must be >= 1");
  require(eps > 0.0 && eps < eps0, "log_window kernel: need 0 < eps < eps0");
  const double coef = 1.0 / (constants::sphere_area(d) * std::log(eps0 / eps));
  KernelSpec k;
  k.params_.family = KernelFamily::log_window;
  k.params_.d = d;
  k.params_.p = p;
  k.params_.eps = eps;
  k.params_.eps0 = eps0;
  k.segments_.push_back({eps, eps0, coef, -d - p});
  k.finalize();
  return k;
}

KernelSpec KernelSpec::rescaled(const KernelSpec& base, double eps) {
  require(eps > 0.0 && eps <= 1.0, "rescaled kernel: eps must lie in (0, 1]");
  const double d = base.d();
  const double p = base.p_order();
  KernelSpec k;
  k.params_ = base.params_;
  k.params_.family = KernelFamily::rescaled;
  k.params_.eps = eps;
  k.params_.scale = 1.0;
  k.params_.base = std::make_shared<const KernelParams>(base.params_);
  if (base.custom_) {
    auto f = base.custom_;
    k.custom_ = std::make_shared<const Density>([f, eps, d, p](double r) {
      const double v = (*f)(r / eps);
      if (r <= eps) return std::pow(eps, -d - p) * v;
      if (r <= 1.0) return std::pow(eps, -d) * std::pow(r, -p) * v;
      return std::pow(eps, -d) * v;
    });
    for (double b : base.custom_breaks_) k.custom_breaks_.push_back(eps * b);
    k.custom_breaks_.push_back(eps);
    k.custom_breaks_.push_back(1.0);
    k.sigma_ = base.sigma_;
    k.nonincreasing_ = base.nonincreasing_;
    k.support_ = base.support_ * eps;
    return k;
  }
  for (const PowerSegment& s : base.segments_) {
    const double lo = eps * s.lo;
    const double hi = eps * s.hi;
    // pieces of [lo, hi) cut at eps and 1
    const double cuts[] = {lo, std::clamp(eps, lo, hi), std::clamp(1.0, lo, hi), hi};
    for (int i = 0; i < 3; ++i) {
      const double a = cuts[i];
      const double b = cuts[i + 1];
      if (!(b > a)) continue;
      const double c_base = s.coef * std::pow(eps, -s.exponent);  // nu(r/eps) = c_base r^q
      if (i == 0) {
        k.segments_.push_back({a, b, c_base * std::pow(eps, -d - p), s.exponent});
      } else if (i == 1) {
        k.segments_.push_back({a, b, c_base * std::pow(eps, -d), s.exponent - p});
      } else {
        k.segments_.push_back({a, b, c_base * std::pow(eps, -d), s.exponent});
      }
    }
  }
  k.finalize();
  return k;
}

KernelSpec KernelSpec::custom(Density density, double singular_exponent, double p, std::vector<double> breaks,
                              bool radially_nonincreasing, Density radial_tail) {
  require(static_cast<bool>(density), "custom kernel: density handle is empty");
  require(p >= 1.0, "p must be >= 1");
  require(singular_exponent < p, "custom kernel: singular exponent must be below p");
  KernelSpec k;
  k.params_.family = KernelFamily::custom;
  k.params_.p = p;
  k.custom_ = std::make_shared<const Density>(std::move(density));
  if (radial_tail) k.custom_tail_ = std::make_shared<const Density>(std::move(radial_tail));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  k.custom_breaks_ = std::move(breaks);
  k.sigma_ = singular_exponent;
  k.nonincreasing_ = radially_nonincreasing;
  k.support_ = kInf;
  return k;
}

void KernelSpec::finalize() {
  std::sort(segments_.begin(), segments_.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  support_ = segments_.empty() ? 0.0 : segments_.back().hi;
  sigma_ = -1.0;
  if (!segments_.empty() && segments_.front().lo == 0.0) sigma_ = -segments_.front().exponent - params_.d;
  nonincreasing_ = !segments_.empty() && segments_.front().lo == 0.0;
  for (std::size_t i = 0; i < segments_.size() && nonincreasing_; ++i) {
    const PowerSegment& s = segments_[i];
    if (s.exponent > 0.0 && s.coef > 0.0) nonincreasing_ = false;
    if (i + 1 < segments_.size()) {
      const PowerSegment& t = segments_[i + 1];
      if (t.lo > s.hi) {
        nonincreasing_ = false;  // gap followed by positive mass
      } else {
        const double left = s.coef * std::pow(s.hi, s.exponent);
        const double right = t.coef * std::pow(t.lo, t.exponent);
        if (right > left * (1.0 + 1e-12)) nonincreasing_ = false;
      }
    }
  }
}

KernelSpec KernelSpec::scaled(double factor) const {
  require(factor > 0.0, "kernel scale factor must be positive");
  KernelSpec k = *this;
  k.params_.scale *= factor;
  for (PowerSegment& s : k.segments_) s.coef *= factor;
  if (custom_) {
    auto f = custom_;
    k.custom_ = std::make_shared<const Density>([f, factor](double r) { return factor * (*f)(r); });
    if (custom_tail_) {
      auto t = custom_tail_;
      k.custom_tail_ = std::make_shared<const Density>([t, factor](double r) { return factor * (*t)(r); });
    }
  }
  return k;
}

double KernelSpec::density(double r) const {
  if (custom_) return (*custom_)(r);
  for (const PowerSegment& s : segments_) {
    if (r >= s.lo && r <= s.hi) return s.coef * std::pow(r, s.exponent);
  }
  return 0.0;
}

std::vector<double> KernelSpec::breakpoints() const {
  std::vector<double> out;
  if (custom_) {
    out = custom_breaks_;
  } else {
    for (const PowerSegment& s : segments_) {
      if (s.lo > 0.0) out.push_back(s.lo);
      if (std::isfinite(s.hi)) out.push_back(s.hi);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double KernelSpec::moment(double k, double a, double b) const {
  require(a >= 0.0 && b >= a, "moment: need 0 <= a <= b");
  if (a == b) return 0.0;
  if (custom_) return integrate_against([](double) { return 1.0; }, k, a, b);
  double total = 0.0;
  for (const PowerSegment& s : segments_) {
    const double lo = std::max(a, s.lo);
    const double hi = std::min(b, s.hi);
    if (hi > lo) total += power_integral(s.coef, s.exponent + k, lo, hi);
  }
  return total;
}

double KernelSpec::radial_tail(double r) const {
  require(r > 0.0, "tail: radius must be positive");
  if (custom_) {
    if (custom_tail_) return (*custom_tail_)(r);
    return integrate_against([](double) { return 1.0; }, 0.0, r, kInf);
  }
  return moment(0.0, r, kInf);
}

double KernelSpec::integrate_against(const std::function<double(double)>& g, double m, double a, double b,
                                     double rel_tol) const {
  require(a >= 0.0 && b > a, "integrate_against: need 0 <= a < b");
  const quad::Options opt{1e-15, rel_tol, 4000};
  // (lo, hi, local density, singular exponent at lo == 0)
  struct Piece {
    double lo, hi;
    std::function<double(double)> nu;
    double coef, exponent;  // used for the origin piece
  };
  std::vector<Piece> pieces;
  if (custom_) {
    std::vector<double> cuts{0.0};
    for (double x : custom_breaks_) cuts.push_back(x);
    if (std::find(cuts.begin(), cuts.end(), 1.0) == cuts.end()) cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(kInf);
    auto f = custom_;
    const double sig = sigma_;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      pieces.push_back({cuts[i], cuts[i + 1], [f](double z) { return (*f)(z); }, 0.0, -1.0 - sig});
    }
  } else {
    for (const PowerSegment& s : segments_) {
      auto nu = [c = s.coef, e = s.exponent](double z) { return c * std::pow(z, e); };
      if (s.lo == 0.0 && s.hi > 1.0) {
        pieces.push_back({0.0, 1.0, nu, s.coef, s.exponent});
        pieces.push_back({1.0, s.hi, nu, s.coef, s.exponent});
      } else {
        pieces.push_back({s.lo, s.hi, nu, s.coef, s.exponent});
      }
    }
  }
  double total = 0.0;
  for (const Piece& pc : pieces) {
    const double lo = std::max(a, pc.lo);
    const double hi = std::min(b, pc.hi);
    if (!(hi > lo)) continue;
    if (lo == 0.0) {
      const double gamma = m + pc.exponent;
      if (!(gamma > -1.0)) {
        throw Error(ErrorKind::non_integrable, "kernel moment of order " + std::to_string(m) +
                                                   " diverges at the origin (singular exponent too large)");
      }
      std::function<double(double)> smooth;
      if (custom_) {
        const double e = pc.exponent;
        smooth = [&g, &pc, e](double z) { return z == 0.0 ? 0.0 : g(z) * pc.nu(z) * std::pow(z, -e); };
      } else {
        smooth = [&g, c = pc.coef](double z) { return c * g(z); };
      }
      total += quad::integrate_power_origin(smooth, hi, gamma, opt);
    } else if (std::isfinite(hi)) {
      total += quad::integrate([&](double z) { return std::pow(z, m) * g(z) * pc.nu(z); }, lo, hi, opt);
    } else {
      const double v = quad::integrate_log_tail([&](double z) { return std::pow(z, m) * g(z) * pc.nu(z); }, lo, opt);
      total += v;
    }
  }
  return total;
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  os << to_string(params_.family);
  switch (params_.family) {
    case KernelFamily::fractional:
      os << "(alpha=" << params_.alpha << ", " << to_string(params_.normalization) << ")";
      break;
    case KernelFamily::window: os << "(beta=" << params_.beta << ", eps=" << params_.eps << ")"; break;
    case KernelFamily::log_window: os << "(eps=" << params_.eps << ", eps0=" << params_.eps0 << ")"; break;
    case KernelFamily::rescaled: os << "(eps=" << params_.eps << ")"; break;
    case KernelFamily::custom: break;
  }
  os << " p=" << params_.p;
  if (params_.scale != 1.0) os << " x" << params_.scale;
  return os.str();
}

KernelSpec make_kernel(const KernelParams& prm) {
  auto build = [](const KernelParams& q, auto&& self) -> KernelSpec {
    switch (q.family) {
      case KernelFamily::fractional: return KernelSpec::fractional(q.alpha, q.normalization, q.d, q.p);
      case KernelFamily::window: return KernelSpec::window(q.beta, q.eps, q.p, q.d);
      case KernelFamily::log_window: return KernelSpec::log_window(q.eps, q.eps0, q.p, q.d);
      case KernelFamily::rescaled: {
        if (!q.base) throw Error(ErrorKind::domain, "rescaled kernel needs a base kernel");
        if (q.base->family == KernelFamily::rescaled) {
          throw Error(ErrorKind::domain, "rescaled kernel: base must not itself be rescaled");
        }
        return KernelSpec::rescaled(self(*q.base, self), q.eps);
      }
      case KernelFamily::custom:
        throw Error(ErrorKind::domain, "custom kernels are built from a density handle, not parameters");
    }
    throw Error(ErrorKind::domain, "unknown kernel family");
  };
  KernelSpec k = build(prm, build);
  if (prm.scale != 1.0) k = k.scaled(prm.scale);
  levy_integral(k);  // throws when the integrability condition fails
  return k;
}

double levy_integral(const KernelSpec& k) {
  const double p = k.p_order();
  auto unit = [](double) { return 1.0; };
  double near = 0.0;
  double far = 0.0;
  try {
    near = k.integrate_against(unit, p, 0.0, 1.0);
    far = (k.support_radius() > 1.0) ? k.radial_tail(1.0) : 0.0;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::non_integrable) throw;
    throw Error(ErrorKind::non_integrable, std::string("p-Levy integral could not be evaluated: ") + e.what());
  }
  const double v = 2.0 * (near + far);
  if (!std::isfinite(v) || v > kOverflowGuard) {
    throw Error(ErrorKind::non_integrable, "kernel is not p-Levy integrable (integral exceeds overflow guard)");
  }
  return v;
}

double concentration_mass(const KernelSpec& k, double delta) {
  require(delta > 0.0, "concentration_mass: delta must be positive");
  auto unit = [](double) { return 1.0; };
  const double p = k.p_order();
  const double R = k.support_radius();
  double v = 0.0;
  if (delta < 1.0) {
    const double hi = std::min(1.0, R);
    if (hi > delta) v += k.integrate_against(unit, p, delta, hi);
    if (R > 1.0) v += k.radial_tail(1.0);
  } else if (R > delta) {
    v += k.radial_tail(delta);
  }
  return 2.0 * v;
}

double symbol(const KernelSpec& k, double xi) {
  xi = std::abs(xi);
  if (xi == 0.0) return 0.0;
  const double c = std::min(1.0, std::numbers::pi / xi);
  const double R = k.support_radius();
  // near the origin: (1 - cos(xi z)) = z^2 * [2 sin^2(xi z / 2) / z^2]
  auto g_near = [xi](double z) {
    if (z == 0.0) return 0.5 * xi * xi;
    const double s = std::sin(0.5 * xi * z);
    return 2.0 * s * s / (z * z);
  };
  double total = k.integrate_against(g_near, 2.0, 0.0, std::min(c, R));
  if (R <= c) return 2.0 * total;
  const double half_period = std::numbers::pi / xi;
  if (std::isfinite(R)) {
    std::vector<double> cuts;
    for (double x = c + half_period; x < R; x += half_period) cuts.push_back(x);
    cuts.push_back(R);
    double prev = c;
    for (double x : cuts) {
      total += k.integrate_against([xi](double z) { return 1.0 - std::cos(xi * z); }, 0.0, prev, x);
      prev = x;
    }
    return 2.0 * total;
  }
  // infinite support: flat part analytically, cosine part with acceleration
  total += k.radial_tail(c);
  double B = c;
  for (double b : k.breakpoints()) B = std::max(B, b);
  double osc = 0.0;
  auto cosine = [xi](double z) { return std::cos(xi * z); };
  if (B > c) {
    double prev = c;
    for (double x = c + half_period; x < B; x += half_period) {
      osc += k.integrate_against(cosine, 0.0, prev, x);
      prev = x;
    }
    osc += k.integrate_against(cosine, 0.0, prev, B);
  }
  osc += quad::integrate_oscillatory_tail([&](double z) { return std::cos(xi * z) * k.density(z); }, B, half_period,
                                          kTight);
  return 2.0 * (total - osc);
}

unsigned long long sampling_seed() {
  const char* s = std::getenv("NONLOCAL_CVP_SEED");
  if (s == nullptr || *s == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  return (end != nullptr && *end == '\0') ? v : 0;
}

double weight_eval(const WeightSpec& w, double x) {
  const Interval& K = w.K;
  require(K.hi > K.lo, "weight_eval: K must have positive length");
  const KernelSpec& k = w.kernel;
  if (w.kind == WeightKind::essinf) {
    if (k.radially_nonincreasing()) {
      const double far = std::max(std::abs(x - K.lo), std::abs(x - K.hi));
      return k.density(far);
    }
    // stratified random sampling: one jittered point per cell plus the endpoints
    constexpr int kSamples = 10000;
    std::mt19937_64 rng(sampling_seed());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double best = std::min(k(x - K.lo), k(x - K.hi));
    const double cell = K.length() / kSamples;
    for (int i = 0; i < kSamples; ++i) {
      const double y = K.lo + (i + unif(rng)) * cell;
      if (y == x) continue;
      best = std::min(best, k(x - y));
    }
    return best;
  }
  std::vector<double> breaks{x};
  for (double b : k.breakpoints()) {
    breaks.push_back(x - b);
    breaks.push_back(x + b);
  }
  auto f = [&](double y) {
    if (y == x) return 1.0;
    return std::min(1.0, k(x - y));
  };
  return quad::integrate_pieces(f, K.lo, K.hi, breaks, kTight);
}

}  // namespace nlcvp
