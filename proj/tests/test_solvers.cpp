#include <cmath>
#include <memory>
#include <numbers>

#include <doctest.h>

#include "nlcvp/errors.hpp"
#include "nlcvp/solvers.hpp"
#include "support.hpp"

using namespace nlcvp;

namespace {

using FormsPtr = std::shared_ptr<const GalerkinForms>;

FormsPtr forms(int n, double alpha, TailMode tail = TailMode::drop, double collar = 0.5) {
  const MeshPtr m = build_mesh(0.0, 1.0, n, collar);
  return std::make_shared<const GalerkinForms>(
      assemble_forms(m, KernelSpec::fractional(alpha, Normalization::exact_C), 10, tail));
}

ComplementProblem problem(FormsPtr F, ProblemKind kind) {
  ComplementProblem p;
  p.forms = std::move(F);
  p.kind = kind;
  return p;
}

// zero outside the given node range
Eigen::VectorXd random_on(const Mesh1D& m, int lo, int hi, unsigned seed) {
  Eigen::VectorXd w = testing::random_vector(static_cast<int>(m.size()), seed);
  for (int i = 0; i < static_cast<int>(m.size()); ++i) {
    if (i < lo || i > hi) w[i] = 0.0;
  }
  return w;
}

double max_rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

RobinData robin_const(double beta) { return RobinData{catalog::constant(beta), std::nullopt}; }

}  // namespace

TEST_SUITE("solvers") {
  TEST_CASE("compatibility residual") {
    const FormsPtr F = forms(32, 1.0);
    ComplementProblem p = problem(F, ProblemKind::neumann);
    p.f = catalog::constant(0.0);
    p.g = catalog::constant(0.0);
    CHECK(check_compatibility(p) == 0.0);
    p.f = catalog::constant(1.0);
    CHECK(check_compatibility(p) == doctest::Approx(1.0).epsilon(1e-12));
    p.f = catalog::sine(2.0 * std::numbers::pi);
    CHECK(check_compatibility(p) < 1e-12);
  }

  TEST_CASE("dirichlet: constants and manufactured solutions") {
    const FormsPtr C = forms(32, 1.3, TailMode::dirichlet_const);
    ComplementProblem p = problem(C, ProblemKind::dirichlet);
    p.g = catalog::constant(2.5);
    const Solution s = solve(p);
    for (int i = C->mesh->ia(); i <= C->mesh->ib(); ++i) CHECK(std::abs(s.u.coeffs[i] - 2.5) < 1e-10);

    const FormsPtr F = forms(48, 0.7, TailMode::dirichlet_zero);
    const Mesh1D& m = *F->mesh;
    const Eigen::VectorXd w = random_on(m, m.ia() + 1, m.ib() - 1, 3);
    ComplementProblem q = problem(F, ProblemKind::dirichlet);
    q.load = Eigen::VectorXd(F->E * w);
    CHECK(max_rel(solve(q).u.coeffs, w) < 1e-10);
  }

  TEST_CASE("neumann: zero data, incompatible data, manufactured solution") {
    const FormsPtr F = forms(40, 1.1);
    const Mesh1D& m = *F->mesh;
    ComplementProblem z = problem(F, ProblemKind::neumann);
    z.f = catalog::constant(0.0);
    CHECK(solve(z).u.coeffs.cwiseAbs().maxCoeff() < 1e-14);

    ComplementProblem bad = problem(F, ProblemKind::neumann);
    bad.f = catalog::constant(1.0);
    try {
      solve(bad);
      FAIL("expected an incompatibility error");
    } catch (const IncompatibleDataError& e) {
      CHECK(e.residual() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::string(e.what()).find("compatibility condition") != std::string::npos);
    }

    Eigen::VectorXd w = testing::random_vector(static_cast<int>(m.size()), 11);
    w.array() -= F->omega_mass.dot(w) / (m.b - m.a);
    ComplementProblem q = problem(F, ProblemKind::neumann);
    q.load = Eigen::VectorXd(F->E * w);
    const Solution s = solve(q);
    CHECK(max_rel(s.u.coeffs, w) < 1e-10);
    CHECK(std::abs(F->omega_mass.dot(s.u.coeffs)) < 1e-12);
  }

  TEST_CASE("neumann with the free constant far field") {
    const FormsPtr F = forms(40, 1.1, TailMode::free_const);
    const Mesh1D& m = *F->mesh;
    Eigen::VectorXd w = testing::random_vector(static_cast<int>(m.size()), 12);
    w.array() -= F->omega_mass.dot(w) / (m.b - m.a);
    ComplementProblem q = problem(F, ProblemKind::neumann);
    q.load = Eigen::VectorXd(F->E * w);
    CHECK(max_rel(solve(q).u.coeffs, w) < 1e-10);
    ComplementProblem bad = problem(forms(16, 1.0, TailMode::dirichlet_zero), ProblemKind::neumann);
    bad.f = catalog::cosine(std::numbers::pi);
    CHECK_THROWS_AS(solve(bad), Error);
  }

  TEST_CASE("robin: manufactured, large beta, zero beta") {
    const FormsPtr F = forms(40, 1.2);
    const Mesh1D& m = *F->mesh;
    ComplementProblem q = problem(F, ProblemKind::robin);
    q.robin = robin_const(3.0);
    const Eigen::VectorXd w = testing::random_vector(static_cast<int>(m.size()), 21);
    q.load = Eigen::VectorXd(problem_matrix(q) * w);
    CHECK(max_rel(solve(q).u.coeffs, w) < 1e-10);

    ComplementProblem d = problem(F, ProblemKind::dirichlet);
    d.f = catalog::constant(1.0);
    const Eigen::VectorXd ud = solve(d).u.coeffs;
    std::vector<double> gaps;
    for (double beta : {1e2, 1e4, 1e8}) {
      ComplementProblem r = problem(F, ProblemKind::robin);
      r.f = catalog::constant(1.0);
      r.robin = robin_const(beta);
      gaps.push_back(l2_omega(*F, solve(r).u.coeffs - ud));
    }
    CHECK(gaps[1] < gaps[0]);
    CHECK(gaps[2] < gaps[1]);
    CHECK(gaps[2] < 1e-3);

    ComplementProblem zero = problem(F, ProblemKind::robin);
    zero.f = catalog::constant(1.0);
    zero.robin = robin_const(0.0);
    CHECK_THROWS_AS(solve(zero), Error);
  }

  TEST_CASE("mixed problems") {
    const FormsPtr F = forms(32, 0.9);
    const Mesh1D& m = *F->mesh;
    std::vector<bool> all(m.size(), false);
    std::vector<bool> left(m.size(), false);
    for (std::size_t i = 0; i < m.size(); ++i) {
      all[i] = m.tags[i] == NodeTag::complement;
      left[i] = all[i] && m.nodes[i] < m.a;
    }
    ComplementProblem mx = problem(F, ProblemKind::mixed);
    mx.f = catalog::cosine(1.0);
    mx.dirichlet_set = all;
    ComplementProblem d = problem(F, ProblemKind::dirichlet);
    d.f = catalog::cosine(1.0);
    CHECK((solve(mx).u.coeffs - solve(d).u.coeffs).cwiseAbs().maxCoeff() < 1e-13);

    ComplementProblem c = problem(F, ProblemKind::mixed);
    c.g = catalog::constant(-1.5);
    c.dirichlet_set = left;
    const Solution sc = solve(c);
    for (int i = m.ia(); i <= m.ib(); ++i) CHECK(std::abs(sc.u.coeffs[i] + 1.5) < 1e-10);

    ComplementProblem mf = problem(F, ProblemKind::mixed);
    mf.dirichlet_set = left;
    const std::vector<int> fixed = mixed_fixed_nodes(m, left);
    Eigen::VectorXd w = testing::random_vector(static_cast<int>(m.size()), 31);
    for (int i : fixed) w[i] = 0.0;
    mf.load = Eigen::VectorXd(F->E * w);
    CHECK(max_rel(solve(mf).u.coeffs, w) < 1e-10);

    ComplementProblem none = problem(F, ProblemKind::mixed);
    none.dirichlet_set.assign(m.size(), false);
    CHECK_THROWS_AS(solve(none), Error);
  }

  TEST_CASE("helmholtz: off resonance, on resonance, lambda = 0") {
    const FormsPtr F = forms(32, 1.4);
    const Mesh1D& m = *F->mesh;
    const Spectrum s = eig(*F, Condition::neumann, 4);
    ComplementProblem h = problem(F, ProblemKind::helmholtz);
    h.lambda = 0.5 * (s.values[1] + s.values[2]);
    const Eigen::VectorXd w = testing::random_vector(static_cast<int>(m.size()), 41);
    h.load = Eigen::VectorXd(problem_matrix(h) * w);
    CHECK(max_rel(solve(h).u.coeffs, w) < 1e-9);

    ComplementProblem r = problem(F, ProblemKind::helmholtz);
    r.lambda = s.values[1];
    r.load = Eigen::VectorXd(F->M * s.vectors.col(1));
    try {
      solve(r);
      FAIL("expected a resonance error");
    } catch (const ResonanceError& e) {
      CHECK(e.eigen_index() == 1);
      CHECK(e.projection_norm() == doctest::Approx(1.0).epsilon(1e-8));
    }

    ComplementProblem fr = problem(F, ProblemKind::helmholtz);
    fr.lambda = s.values[1];
    fr.load = Eigen::VectorXd(F->M * s.vectors.col(2));
    const Solution sf = solve(fr);
    CHECK(sf.resonant);
    const Eigen::VectorXd want = s.vectors.col(2) / (s.values[2] - s.values[1]);
    CHECK(l2_omega(*F, sf.u.coeffs - want) < 1e-9 * l2_omega(*F, want));

    ComplementProblem z = problem(F, ProblemKind::helmholtz);
    z.f = catalog::cosine(std::numbers::pi);
    ComplementProblem n = problem(F, ProblemKind::neumann);
    n.f = catalog::cosine(std::numbers::pi);
    CHECK(l2_omega(*F, solve(z).u.coeffs - solve(n).u.coeffs) < 1e-10);
  }

  TEST_CASE("helmholtz over the dirichlet space") {
    const FormsPtr F = forms(32, 1.0, TailMode::dirichlet_zero);
    const Mesh1D& m = *F->mesh;
    const Spectrum s = eig(*F, Condition::dirichlet, 3);
    ComplementProblem h = problem(F, ProblemKind::helmholtz);
    h.helmholtz_space = Condition::dirichlet;
    h.lambda = 0.5 * (s.values[0] + s.values[1]);
    const Eigen::VectorXd w = random_on(m, m.ia() + 1, m.ib() - 1, 51);
    h.load = Eigen::VectorXd(problem_matrix(h) * w);
    CHECK(max_rel(solve(h).u.coeffs, w) < 1e-9);
  }

  TEST_CASE("variational residual against random test fields") {
    const FormsPtr F = forms(40, 0.8, TailMode::dirichlet_zero);
    const Mesh1D& m = *F->mesh;
    ComplementProblem p = problem(F, ProblemKind::dirichlet);
    p.f = catalog::gaussian(0.3, 0.4);
    const Solution s = solve(p);
    const Eigen::VectorXd b = assemble_load(m, p.f, ScalarField());
    for (unsigned seed = 0; seed < 50; ++seed) {
      const Eigen::VectorXd v = random_on(m, m.ia() + 1, m.ib() - 1, 500 + seed);
      CHECK(std::abs(v.dot(F->E * s.u.coeffs) - v.dot(b)) / v.norm() <= 1e-9);
    }
  }

  TEST_CASE("weak regularity estimate holds with one constant across meshes") {
    double C = 0.0;
    bool first = true;
    for (int n : {16, 32, 64}) {
      const FormsPtr F = forms(n, 1.2);
      for (unsigned seed = 0; seed < 10; ++seed) {
        const Eigen::VectorXd c = testing::random_vector(3, 900 + seed);
        ComplementProblem p = problem(F, ProblemKind::neumann);
        p.f = ScalarField([c](double x) {
          double s = 0.0;
          for (int k = 0; k < 3; ++k) s += c[k] * std::cos((k + 1) * std::numbers::pi * x);
          return s;
        });
        const Solution s = solve(p);
        const Eigen::VectorXd fn = DiscreteField::interpolate(F->mesh, p.f).coeffs;
        const double lhs = l2_omega(*F, s.u.coeffs) + std::sqrt(seminorm_E(*F, s.u));
        const double ratio = lhs / l2_omega(*F, fn);
        if (first) {
          C = std::max(C, 1.5 * ratio);
        } else {
          CHECK(ratio <= C);
        }
      }
      first = false;
    }
  }
}
