#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "nlcvp/assembly.hpp"
#include "nlcvp/errors.hpp"
#include "nlcvp/operator.hpp"
#include "nlcvp/quadrature.hpp"
#include "support.hpp"

using namespace nlcvp;

namespace {

std::vector<KernelSpec> kernel_catalog() {
  std::vector<KernelSpec> ks;
  for (double alpha : {0.5, 1.0, 1.5, 1.9}) {
    ks.push_back(KernelSpec::fractional(alpha, Normalization::exact_C));
    ks.push_back(KernelSpec::fractional(alpha, Normalization::stable_a));
  }
  ks.push_back(KernelSpec::fractional(1.2, Normalization::half_C));
  ks.push_back(KernelSpec::fractional(0.8, Normalization::unnormalized));
  ks.push_back(KernelSpec::window(0.0, 0.1));
  ks.push_back(KernelSpec::window(2.0, 0.3));
  ks.push_back(KernelSpec::log_window(0.05, 0.5));
  ks.push_back(KernelSpec::rescaled(KernelSpec::fractional(1.0, Normalization::stable_a), 0.2));
  return ks;
}

double hat(const Mesh1D& m, int i, double x) {
  const double r = std::abs(x - m.nodes[i]) / m.h;
  return r < 1.0 ? 1.0 - r : 0.0;
}

// -integral over supp_i x supp_j of phi_i(x) phi_j(y) nu(x - y), element by element
double separated_entry(const Mesh1D& m, const KernelSpec& k, int i, int j, int order) {
  const quad::Rule& r = quad::gauss_legendre(order);
  double s = 0.0;
  for (int ei : {i - 1, i}) {
    for (int ej : {j - 1, j}) {
      for (std::size_t p = 0; p < r.nodes.size(); ++p) {
        const double x = m.nodes[ei] + 0.5 * (1.0 + r.nodes[p]) * m.h;
        for (std::size_t q = 0; q < r.nodes.size(); ++q) {
          const double y = m.nodes[ej] + 0.5 * (1.0 + r.nodes[q]) * m.h;
          s += r.weights[p] * r.weights[q] * hat(m, i, x) * hat(m, j, y) * k(x - y);
        }
      }
    }
  }
  return -s * 0.25 * m.h * m.h;
}

}  // namespace

TEST_SUITE("assembly") {
  TEST_CASE("mesh construction") {
    const MeshPtr m = build_mesh(0.0, 1.0, 8, 1.0);
    CHECK(m->size() == 25);
    CHECK(m->h == doctest::Approx(0.125));
    CHECK(m->indices(NodeTag::interior).size() == 7);
    CHECK(m->indices(NodeTag::boundary).size() == 2);
    CHECK(m->indices(NodeTag::complement).size() == 16);
    CHECK(m->nodes[m->ia()] == 0.0);
    CHECK(m->nodes[m->ib()] == 1.0);
    for (std::size_t i = 1; i < m->size(); ++i) CHECK(std::abs(m->nodes[i] - m->nodes[i - 1] - m->h) < 1e-12);
    CHECK(build_mesh(0.0, 1.0, 8, 0.9)->collar_R == doctest::Approx(1.0));
    CHECK_THROWS_AS(build_mesh(0.0, 0.0, 8, 1.0), Error);
    CHECK_THROWS_AS(build_mesh(0.0, 1.0, 3, 1.0), Error);
  }

  TEST_CASE("discrete fields") {
    const MeshPtr m = build_mesh(0.0, 1.0, 8, 0.5);
    const DiscreteField u = DiscreteField::interpolate(m, catalog::monomial(1));
    CHECK(u(0.3) == doctest::Approx(0.3));
    CHECK(u(5.0) == 0.0);
    CHECK(DiscreteField::constant(m, 2.0)(0.77) == doctest::Approx(2.0));
  }

  TEST_CASE("form structure over the kernel catalog") {
    const MeshPtr m = build_mesh(0.0, 1.0, 128, 0.5);
    for (const KernelSpec& k : kernel_catalog()) {
      CAPTURE(k.describe());
      const GalerkinForms F = assemble_forms(m, k);
      const double nrm = F.E.cwiseAbs().maxCoeff();
      CHECK((F.E - F.E.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * nrm);
      CHECK((F.E * Eigen::VectorXd::Ones(F.E.cols())).cwiseAbs().maxCoeff() <= 1e-12 * nrm * F.E.cols());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F.E, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues()[0] >= -1e-10 * nrm);
      for (unsigned seed = 0; seed < 5; ++seed) {
        const Eigen::VectorXd x = testing::random_vector(static_cast<int>(F.size()), seed);
        CHECK(x.dot(F.E * x) >= -1e-10 * nrm * x.squaredNorm());
      }
      Eigen::LLT<Eigen::MatrixXd> llt(F.M.block(m->ia(), m->ia(), m->n + 1, m->n + 1));
      CHECK(llt.info() == Eigen::Success);
    }
  }

  TEST_CASE("compact window below the mesh width gives a banded form") {
    const MeshPtr m = build_mesh(0.0, 1.0, 16, 0.25);
    const GalerkinForms F = assemble_forms(m, KernelSpec::window(0.0, 0.5 * m->h));
    for (int i = 0; i < static_cast<int>(F.size()); ++i) {
      for (int j = 0; j < static_cast<int>(F.size()); ++j) {
        if (std::abs(i - j) > 2) CHECK(F.E(i, j) == 0.0);
      }
    }
    CHECK((F.E * Eigen::VectorXd::Ones(F.E.cols())).cwiseAbs().maxCoeff() <= 1e-13 * F.E.cwiseAbs().maxCoeff());
  }

  TEST_CASE("fractional form has exactly the constants in its kernel") {
    const MeshPtr m = build_mesh(0.0, 1.0, 8, 1.0);
    const GalerkinForms F = assemble_forms(m, KernelSpec::fractional(1.0, Normalization::exact_C));
    CHECK(F.size() == 25);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F.E);
    const double top = es.eigenvalues().maxCoeff();
    int small = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) small += es.eigenvalues()[i] < 1e-10 * top;
    CHECK(small == 1);
    const Eigen::VectorXd v = es.eigenvectors().col(0);
    CHECK((v.array() - v.mean()).abs().maxCoeff() < 1e-8);
  }

  TEST_CASE("separated entries match brute-force tensor quadrature") {
    const MeshPtr m = build_mesh(0.0, 1.0, 16, 0.5);
    for (double alpha : {0.6, 1.5}) {
      const KernelSpec k = KernelSpec::fractional(alpha, Normalization::exact_C);
      const GalerkinForms F = assemble_forms(m, k);
      for (auto [i, j] : {std::pair{m->ia() + 2, m->ia() + 7}, std::pair{m->ia() + 1, m->ib() - 2}}) {
        CHECK(std::abs(F.E(i, j) - separated_entry(*m, k, i, j, 40)) < 1e-9);
      }
    }
  }

  TEST_CASE("converges to the continuum form at second order") {
    const KernelSpec k = KernelSpec::fractional(1.2, Normalization::exact_C);
    const ScalarField u = catalog::bump(0.5, 0.9);
    const ScalarField v = catalog::bump(0.3, 0.6);
    const double exact = energy_form(k, {0.0, 1.0}, u, v);
    const GreenGaussTerms gg = green_gauss_terms(k, {0.0, 1.0}, u, v, 1.0);
    CHECK(std::abs(gg.lhs - gg.complement - exact) < 1e-7);
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
      const MeshPtr m = build_mesh(0.0, 1.0, n, 0.5);
      const GalerkinForms F = assemble_forms(m, k, 12, TailMode::dirichlet_zero);
      const Eigen::VectorXd uh = DiscreteField::interpolate(m, u).coeffs;
      const Eigen::VectorXd vh = DiscreteField::interpolate(m, v).coeffs;
      err.push_back(std::abs(uh.dot(F.E * vh) - exact));
    }
    CHECK(err[0] / err[1] > 3.0);
    CHECK(err[1] / err[2] > 3.0);
  }

  TEST_CASE("comparability with the full seminorm") {
    const MeshPtr m = build_mesh(0.0, 1.0, 32, 0.5);
    const KernelSpec k = KernelSpec::fractional(0.9, Normalization::exact_C);
    const GalerkinForms F = assemble_forms(m, k);
    const Eigen::MatrixXd V = assemble_v_form(m, k);
    for (unsigned seed = 0; seed < 20; ++seed) {
      const Eigen::VectorXd x = testing::random_vector(static_cast<int>(F.size()), 100 + seed);
      const double e = x.dot(F.E * x);
      const double vv = x.dot(V * x);
      CHECK(e <= vv * (1.0 + 1e-12));
      CHECK(vv <= 2.0 * e * (1.0 + 1e-12));
    }
  }

  TEST_CASE("seminorm values") {
    const MeshPtr m = build_mesh(0.0, 1.0, 16, 0.5);
    const GalerkinForms F = assemble_forms(m, KernelSpec::fractional(1.0, Normalization::half_C));
    CHECK(std::abs(seminorm_E(F, DiscreteField::constant(m, 1.0))) < 1e-12);
    for (int i = 0; i < static_cast<int>(F.size()); ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(F.size());
      e[i] = 1.0;
      CHECK(seminorm_E(F, DiscreteField(m, e)) > 0.0);
    }
    // u = x is reproduced exactly by P1, so the value does not move with the mesh
    double first = 0.0;
    for (int n : {32, 64, 128}) {
      const MeshPtr mm = build_mesh(0.0, 1.0, n, 0.5);
      const GalerkinForms G = assemble_forms(mm, KernelSpec::fractional(1.0, Normalization::half_C));
      const double s = seminorm_E(G, DiscreteField::interpolate(mm, catalog::monomial(1)));
      CHECK(s > 0.0);
      if (first == 0.0) first = s;
      CHECK(std::abs(s - first) <= 1e-9 * first);
    }
  }

  TEST_CASE("load vectors") {
    const MeshPtr m = build_mesh(0.0, 1.0, 10, 0.3);
    const Eigen::VectorXd z = assemble_load(*m, catalog::constant(0.0), catalog::constant(0.0));
    CHECK(z.cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd b = assemble_load(*m, catalog::constant(1.0), ScalarField());
    for (int i = 0; i < static_cast<int>(m->size()); ++i) {
      const double want = (i > m->ia() && i < m->ib()) ? m->h : (i == m->ia() || i == m->ib()) ? 0.5 * m->h : 0.0;
      CHECK(b[i] == doctest::Approx(want).epsilon(1e-13));
    }
    const KernelSpec k = KernelSpec::fractional(1.0, Normalization::exact_C);
    const WeightSpec w{k, {0.4, 0.6}, WeightKind::essinf};
    const Eigen::VectorXd g = assemble_load(*m, ScalarField(), catalog::constant(1.0), w);
    for (int i = 0; i < static_cast<int>(m->size()); ++i) {
      double want = 0.0;
      for (int e : {i - 1, i}) {
        if (e < 0 || e >= m->elements() || m->element_in_omega(e)) continue;
        want += quad::gauss([&](double x) { return hat(*m, i, x) * weight_eval(w, x); }, m->nodes[e], m->nodes[e + 1],
                            30);
      }
      CHECK(std::abs(g[i] - want) < 1e-10 * std::max(1.0, want));
    }
  }

  TEST_CASE("tail modes") {
    const MeshPtr m = build_mesh(0.0, 1.0, 32, 0.25);
    const KernelSpec k = KernelSpec::fractional(1.0, Normalization::exact_C);
    const GalerkinForms D = assemble_forms(m, k, 10, TailMode::drop);
    const GalerkinForms Z = assemble_forms(m, k, 10, TailMode::dirichlet_zero);
    const GalerkinForms C = assemble_forms(m, k, 10, TailMode::free_const);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(D.size());
    CHECK((C.E * one).cwiseAbs().maxCoeff() < 1e-12 * C.E.cwiseAbs().maxCoeff() * C.size());
    CHECK(one.dot(Z.E * one) > 0.0);
    CHECK(Z.tail_load.sum() == doctest::Approx(one.dot(Z.E * one)).epsilon(1e-12));
    for (unsigned seed = 0; seed < 10; ++seed) {
      const Eigen::VectorXd x = testing::random_vector(static_cast<int>(D.size()), 7 + seed);
      const double d = x.dot(D.E * x);
      const double c = x.dot(C.E * x);
      const double z = x.dot(Z.E * x);
      CHECK(d <= c * (1.0 + 1e-12));
      CHECK(c <= z * (1.0 + 1e-12));
    }
  }

  TEST_CASE("threaded assembly matches serial assembly") {
    const MeshPtr m = build_mesh(0.0, 1.0, 40, 0.5);
    const KernelSpec k = KernelSpec::fractional(1.3, Normalization::exact_C);
    const GalerkinForms a = assemble_forms(m, k, 10, TailMode::drop, 1);
    const GalerkinForms b = assemble_forms(m, k, 10, TailMode::drop, 3);
    CHECK((a.E - b.E).cwiseAbs().maxCoeff() <= 1e-14 * a.E.cwiseAbs().maxCoeff());
  }

  TEST_CASE("non-integrable kernels are rejected") {
    CHECK_THROWS_AS(KernelSpec::custom([](double r) { return std::pow(r, -3.2); }, 2.2, 2.0), Error);
    KernelParams p;
    p.alpha = 2.3;
    CHECK_THROWS_AS(make_kernel(p), Error);
  }

  TEST_CASE("matrix market export") {
    Eigen::MatrixXd A(2, 2);
    A << 2.0, -1.0, -1.0, 3.0;
    std::ostringstream os;
    write_matrix_market(os, A, true);
    const std::string s = os.str();
    CHECK(s.rfind("%%MatrixMarket matrix coordinate real symmetric", 0) == 0);
    CHECK(s.find("2 2 3") != std::string::npos);
    CHECK(s.find("2 1 -1") != std::string::npos);
  }
}
