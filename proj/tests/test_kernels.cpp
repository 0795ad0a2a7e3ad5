#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "nlcvp/constants.hpp"
#include "nlcvp/errors.hpp"
#include "nlcvp/kernels.hpp"
#include "support.hpp"

using namespace nlcvp;
using testing::rel;

TEST_SUITE("kernels") {
  TEST_CASE("fractional densities") {
    const KernelSpec s = KernelSpec::fractional(1.0, Normalization::stable_a);
    CHECK(s.density(1.0) == doctest::Approx(0.25));
    CHECK(s.density(2.0) == doctest::Approx(0.25 / 4.0));
    const KernelSpec e = KernelSpec::fractional(1.0, Normalization::exact_C);
    CHECK(e.density(0.5) == doctest::Approx(4.0 / std::numbers::pi));
    const KernelSpec h = KernelSpec::fractional(1.3, Normalization::half_C);
    CHECK(h.density(0.7) == doctest::Approx(0.5 * constants::frac_norming_constant(1, 1.3) * std::pow(0.7, -2.3)));
    CHECK(e(-0.5) == e(0.5));
    CHECK_THROWS_AS(KernelSpec::fractional(2.0, Normalization::exact_C), Error);
    CHECK_THROWS_AS(KernelSpec::fractional(-0.1, Normalization::exact_C), Error);
  }

  TEST_CASE("window family density and normalization") {
    const KernelSpec w = KernelSpec::window(2.0, 0.1);
    CHECK(w.density(0.05) == doctest::Approx(1500.0));
    CHECK(w.density(0.1) == doctest::Approx(1500.0));
    CHECK(w.density(0.11) == 0.0);
    CHECK(std::abs(levy_integral(w) - 1.0) < 1e-10);
    for (double beta : {-0.5, 0.0, 1.0, 2.0}) {
      for (double eps = 0.4; eps > 1e-3; eps /= 3.0) {
        CAPTURE(beta);
        CAPTURE(eps);
        CHECK(std::abs(levy_integral(KernelSpec::window(beta, eps)) - 1.0) < 1e-6);
      }
    }
    CHECK_THROWS_AS(KernelSpec::window(-1.5, 0.1), Error);
  }

  TEST_CASE("levy integral of fractional kernels") {
    for (double alpha : {0.5, 1.0, 1.5}) {
      CHECK(std::abs(levy_integral(KernelSpec::fractional(alpha, Normalization::stable_a)) - 1.0) < 1e-8);
    }
    CHECK(levy_integral(KernelSpec::fractional(1.0, Normalization::unnormalized)) == doctest::Approx(4.0).epsilon(1e-10));
    // C |h|^{-1-alpha}: 2 C (1 / (2 - alpha) + 1 / alpha)
    const KernelSpec k = KernelSpec::fractional(0.7, Normalization::exact_C);
    const double c = constants::frac_norming_constant(1, 0.7);
    CHECK(rel(levy_integral(k), 2.0 * c * (1.0 / 1.3 + 1.0 / 0.7)) < 1e-12);
  }

  TEST_CASE("log window and rescaled families are normalized") {
    for (double eps = 0.3; eps > 1e-3; eps /= 4.0) {
      CHECK(std::abs(levy_integral(KernelSpec::log_window(eps, 0.5)) - 1.0) < 1e-6);
      const KernelSpec base = KernelSpec::fractional(1.2, Normalization::stable_a);
      CHECK(std::abs(levy_integral(KernelSpec::rescaled(base, eps)) - 1.0) < 1e-6);
    }
  }

  TEST_CASE("concentration mass") {
    CHECK(concentration_mass(KernelSpec::window(0.0, 0.05), 0.1) == 0.0);
    const double c = concentration_mass(KernelSpec::fractional(1.9, Normalization::stable_a), 0.5);
    CHECK(c < 0.14);
    for (double alpha : {0.5, 1.0, 1.5, 1.9}) {
      CHECK(concentration_mass(KernelSpec::fractional(alpha, Normalization::stable_a), 1.0) <= (2.0 - alpha) / 2.0 + 1e-12);
    }
    const double first = concentration_mass(KernelSpec::fractional(1.0, Normalization::stable_a), 0.3);
    const double last = concentration_mass(KernelSpec::fractional(1.99, Normalization::stable_a), 0.3);
    CHECK(last < first / 10.0);
    double prev = 1e300;
    for (double eps = 0.2; eps > 1e-3; eps /= 2.0) {
      const double m = concentration_mass(KernelSpec::log_window(eps, 0.5), 0.3);
      CHECK(m <= prev + 1e-14);
      prev = m;
    }
  }

  TEST_CASE("symbol of the exact fractional kernel is |xi|^alpha") {
    for (double alpha : {0.5, 1.0, 1.5}) {
      const KernelSpec k = KernelSpec::fractional(alpha, Normalization::exact_C);
      for (double xi : {0.5, 1.0, 2.0}) {
        CHECK(rel(symbol(k, xi), std::pow(xi, alpha)) < 1e-6);
      }
    }
    CHECK(symbol(KernelSpec::fractional(1.5, Normalization::exact_C), 2.0) == doctest::Approx(2.8284271).epsilon(1e-7));
  }

  TEST_CASE("symbol is even, vanishes at zero and is nonnegative") {
    const KernelSpec ks[] = {KernelSpec::fractional(0.8, Normalization::half_C), KernelSpec::window(1.0, 0.3),
                             KernelSpec::log_window(0.1, 0.5)};
    for (const auto& k : ks) {
      CHECK(symbol(k, 0.0) == 0.0);
      for (double xi = 0.1; xi < 20.0; xi *= 1.7) {
        CHECK(std::abs(symbol(k, xi) - symbol(k, -xi)) <= 1e-12 * std::max(1.0, symbol(k, xi)));
        CHECK(symbol(k, xi) >= 0.0);
      }
    }
  }

  TEST_CASE("essinf and integral weights") {
    const KernelSpec k = KernelSpec::fractional(1.0, Normalization::unnormalized);
    const WeightSpec inf{k, {0.4, 0.6}, WeightKind::essinf};
    CHECK(weight_eval(inf, 2.0) == doctest::Approx(0.390625).epsilon(1e-12));
    // grid minimization oracle over K
    double m = 1e300;
    for (int i = 0; i <= 10000; ++i) m = std::min(m, k.density(2.0 - (0.4 + 0.2 * i / 10000.0)));
    CHECK(rel(weight_eval(inf, 2.0), m) < 1e-9);
    CHECK(weight_eval(inf, 0.5) == doctest::Approx(k.density(0.1)));
    const WeightSpec integ{k, {0.4, 0.6}, WeightKind::integral};
    CHECK(weight_eval(integ, 2.0) == doctest::Approx(1.0 / 1.4 - 1.0 / 1.6).epsilon(1e-10));
    // capped integrand never exceeds |K|
    for (double x = -3.0; x < 4.0; x += 0.37) CHECK(weight_eval(integ, x) <= 0.2 + 1e-14);
  }

  TEST_CASE("essinf weight decreases with distance to K") {
    const WeightSpec w{KernelSpec::fractional(1.3, Normalization::exact_C), {0.2, 0.5}, WeightKind::essinf};
    double prev = 1e300;
    for (double x = 0.6; x < 5.0; x += 0.1) {
      const double v = weight_eval(w, x);
      CHECK(v > 0.0);
      CHECK(v <= prev);
      prev = v;
    }
  }

  TEST_CASE("moments and tails agree with quadrature of the density") {
    const KernelSpec k = KernelSpec::fractional(1.4, Normalization::exact_C);
    auto f = [&](double h) { return h * h * k.density(h); };
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.2, 0.9, 15, 1e-14);
    CHECK(rel(k.moment(2.0, 0.2, 0.9), q) < 1e-12);
    const double t = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double h) { return k.density(h); }, 1.5, std::numeric_limits<double>::infinity(), 20, 1e-14);
    CHECK(rel(k.radial_tail(1.5), t) < 1e-9);
  }
}
