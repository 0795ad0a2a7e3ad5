#include "nlcvp/quadrature.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <utility>

#include <Eigen/Dense>

#include "nlcvp/constants.hpp"
#include "nlcvp/errors.hpp"

namespace nlcvp::quad {

namespace {

Rule make_gauss_legendre(int n) {
  Rule r;
  if (n == 1) return {{0.0}, {2.0}};
  r.nodes.resize(n);
  r.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

// Jacobi weight (1-x)^0 (1+x)^b on [-1,1], mapped to t^b on [0,1].
Rule make_gauss_jacobi_unit(int n, double b) {
  const double a = 0.0;
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max(n - 1, 1));
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    diag(k) = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    double v;
    if (k == 1) {
      v = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b) * (2.0 + a + b) * (3.0 + a + b));
    } else {
      v = 4.0 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s + 1.0) * (s - 1.0));
    }
    sub(k - 1) = std::sqrt(v);
  }
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  if (n == 1) {
    r.nodes[0] = 0.5 * (1.0 + diag(0));
    r.weights[0] = 1.0 / (b + 1.0);
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
  // mu0 for (1+x)^b on [-1,1] is 2^{b+1}/(b+1); the map to [0,1] scales by 2^{-b-1}.
  const double mu0 = 1.0 / (b + 1.0);
  for (int i = 0; i < n; ++i) {
    const double x = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    r.nodes[i] = 0.5 * (1.0 + x);
    r.weights[i] = mu0 * v0 * v0;
  }
  return r;
}

struct Interval {
  double a, b, value, error, noise;  // noise: rounding floor of the rule on this interval
  bool operator<(const Interval& o) const { return error - noise < o.error - o.noise; }
};

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

Interval gk15(const Integrand& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  double resabs = std::abs(fc) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    const double f1 = f(c - x);
    const double f2 = f(c + x);
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double value = resk * h;
  const double err = std::abs((resk - resg) * h);
  return {a, b, value, err, 50.0 * std::numeric_limits<double>::epsilon() * resabs * std::abs(h)};
}

}  // namespace

const Rule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

const Rule& gauss_jacobi_unit(int n, double gamma) {
  if (!(gamma > -1.0)) throw Error(ErrorKind::domain, "gauss_jacobi_unit: exponent must exceed -1");
  static std::mutex mu;
  static std::map<std::pair<int, double>, Rule> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_pair(n, gamma);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, make_gauss_jacobi_unit(n, gamma)).first;
  return it->second;
}

Result adaptive(const Integrand& f, double a, double b, const Options& opt) {
  Result res;
  if (a == b) {
    res.converged = true;
    return res;
  }
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::priority_queue<Interval> heap;
  Interval first = gk15(f, a, b);
  heap.push(first);
  double total = first.value;
  double total_err = first.error;
  double total_noise = first.noise;
  int count = 1;
  res.evaluations = 15;
  while (total_err > std::max({opt.abs_tol, opt.rel_tol * std::abs(total), total_noise})) {
    if (count >= opt.max_intervals) break;
    Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    Interval left = gk15(f, worst.a, mid);
    Interval right = gk15(f, mid, worst.b);
    res.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    total_noise += left.noise + right.noise - worst.noise;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // re-sum to remove drift of the running totals
  total = 0.0;
  total_err = 0.0;
  total_noise = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    total_noise += heap.top().noise;
    heap.pop();
  }
  res.value = sign * total;
  res.error = total_err;
  res.converged = total_err <= std::max({opt.abs_tol, opt.rel_tol * std::abs(total), total_noise}) * 1.0000001;
  return res;
}

double integrate(const Integrand& f, double a, double b, const Options& opt) {
  Result r = adaptive(f, a, b, opt);
  if (!r.converged || !std::isfinite(r.value)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "adaptive quadrature did not converge on [%.6g, %.6g]: value %.6g, error estimate %.3g",
                  a, b, r.value, r.error);
    throw Error(ErrorKind::quadrature, buf);
  }
  return r.value;
}

double integrate_pieces(const Integrand& f, double a, double b, std::vector<double> breaks, const Options& opt) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  double prev = a;
  for (double x : breaks) {
    if (x <= prev || x > b) continue;
    total += integrate(f, prev, x, opt);
    prev = x;
  }
  return total;
}

double integrate_power_origin(const Integrand& g, double b, double gamma, const Options& opt) {
  if (b <= 0.0) return 0.0;
  double scale_acc = 0.0;
  double length = b;
  // Gauss-Jacobi on [0, length]; if two orders disagree, peel off [length/4, length]
  // with Gauss-Kronrod and retry closer to the origin.
  for (int depth = 0; depth < 60; ++depth) {
    auto jacobi = [&](int n) {
      const Rule& r = gauss_jacobi_unit(n, gamma);
      double s = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * g(length * r.nodes[i]);
      return s * std::pow(length, gamma + 1.0);
    };
    const double lo = jacobi(24);
    const double hi = jacobi(40);
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(hi + scale_acc));
    if (std::abs(hi - lo) <= tol && std::isfinite(hi)) return scale_acc + hi;
    // what is left near the origin no longer matters at the requested accuracy
    if (depth > 0 && std::abs(hi) + std::abs(lo) <= 0.1 * tol && std::isfinite(hi)) return scale_acc + hi;
    const double cut = 0.25 * length;
    // each peel only needs to be accurate relative to the whole integral
    Options peel = opt;
    peel.abs_tol = std::max(opt.abs_tol, 0.1 * tol);
    scale_acc += integrate([&](double z) { return g(z) * std::pow(z, gamma); }, cut, length, peel);
    length = cut;
  }
  throw Error(ErrorKind::quadrature, "integrate_power_origin: no convergence toward the origin");
}

double integrate_log_tail(const Integrand& f, double r0, const Options& opt) {
  if (!(r0 > 0.0)) throw Error(ErrorKind::domain, "integrate_log_tail requires r0 > 0");
  auto mapped = [&](double s) {
    const double z = r0 * std::exp(s);
    return f(z) * z;
  };
  double total = 0.0;
  int quiet = 0;
  for (int k = 0; k < 800; ++k) {
    const double part = integrate(mapped, k, k + 1.0, {opt.abs_tol * 1e-2, opt.rel_tol, opt.max_intervals});
    total += part;
    if (std::abs(part) <= std::max(opt.abs_tol * 1e-2, opt.rel_tol * 1e-2 * std::abs(total))) {
      if (++quiet >= 3) return total;
    } else {
      quiet = 0;
    }
    if (r0 * std::exp(k + 1.0) > 1e300) break;
  }
  return total;
}

double wynn_epsilon(std::span<const double> s) {
  const std::size_t n = s.size();
  if (n == 0) return 0.0;
  if (n < 3) return s.back();
  // e_prev = eps_{j-1}, e_cur = eps_j, columns indexed by k.
  std::vector<double> e_prev(n + 1, 0.0);
  std::vector<double> e_cur(s.begin(), s.end());
  double best = s.back();
  double best_delta = std::abs(s[n - 1] - s[n - 2]);
  for (std::size_t j = 1; j < n; ++j) {
    const std::size_t len = n - j;
    std::vector<double> e_next(len);
    bool ok = true;
    for (std::size_t k = 0; k < len; ++k) {
      const double diff = e_cur[k + 1] - e_cur[k];
      if (diff == 0.0) {
        ok = false;
        break;
      }
      e_next[k] = e_prev[k + 1] + 1.0 / diff;
    }
    if (!ok) break;
    if (j % 2 == 0) {
      // even columns carry limit estimates; judge by the last two entries
      if (len >= 2) {
        const double delta = std::abs(e_next[len - 1] - e_next[len - 2]);
        if (delta < best_delta && std::isfinite(e_next[len - 1])) {
          best_delta = delta;
          best = e_next[len - 1];
        }
      } else if (std::isfinite(e_next[0]) && best_delta > 0.0) {
        best = e_next[0];
      }
    }
    e_prev.assign(e_cur.begin(), e_cur.end());
    e_cur = std::move(e_next);
  }
  return best;
}

double integrate_oscillatory_tail(const Integrand& f, double r0, double chunk, const Options& opt) {
  if (!(chunk > 0.0)) throw Error(ErrorKind::domain, "integrate_oscillatory_tail: chunk must be positive");
  std::vector<double> partial;
  double sum = 0.0;
  double prev_estimate = 0.0;
  for (int k = 0; k < 400; ++k) {
    const double lo = r0 + k * chunk;
    sum += integrate(f, lo, lo + chunk, {opt.abs_tol * 1e-2, opt.rel_tol * 1e-2, opt.max_intervals});
    partial.push_back(sum);
    if (partial.size() >= 12 && partial.size() % 4 == 0) {
      const std::size_t window = std::min<std::size_t>(partial.size(), 40);
      const double est = wynn_epsilon(std::span<const double>(partial).last(window));
      if (partial.size() >= 16 && std::abs(est - prev_estimate) <= std::max(opt.abs_tol, opt.rel_tol * std::abs(est)))
        return est;
      prev_estimate = est;
    }
  }
  return wynn_epsilon(std::span<const double>(partial).last(std::min<std::size_t>(partial.size(), 40)));
}

}  // namespace nlcvp::quad
