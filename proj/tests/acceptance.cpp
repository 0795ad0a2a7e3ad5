// Acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "nlcvp/constants.hpp"
#include "nlcvp/convergence.hpp"
#include "nlcvp/errors.hpp"
#include "nlcvp/operator.hpp"
#include "nlcvp/solvers.hpp"
#include "nlcvp/spectral.hpp"

using namespace nlcvp;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

double max_rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

using FormsPtr = std::shared_ptr<const GalerkinForms>;

FormsPtr forms(double a, double b, int n, const KernelSpec& k, TailMode tail, double collar) {
  return std::make_shared<const GalerkinForms>(assemble_forms(build_mesh(a, b, n, collar), k, 10, tail));
}

FormsPtr forms(int n, double alpha, TailMode tail = TailMode::drop, double collar = 0.5) {
  return forms(0.0, 1.0, n, KernelSpec::fractional(alpha, Normalization::exact_C), tail, collar);
}

ComplementProblem problem(FormsPtr F, ProblemKind kind) {
  ComplementProblem p;
  p.forms = std::move(F);
  p.kind = kind;
  return p;
}

// ---- criteria --------------------------------------------------------------

Outcome constant_asymptotics() {
  auto ratio = [](double s) { return constants::frac_norming_constant(1, 2.0 * s) / (s * (1.0 - s)); };
  const double e0 = rel(ratio(1e-4), 1.0);
  const double e1 = rel(ratio(1.0 - 1e-4), 2.0);
  return {e0 <= 1e-3 && e1 <= 1e-3, "rel errors " + fmt("%.2e", e0) + " (s->0), " + fmt("%.2e", e1) + " (s->1)"};
}

Outcome constant_integral() {
  double worst = 0.0;
  for (double alpha : {0.5, 1.0, 1.5}) {
    const double inv = 1.0 / constants::frac_norming_constant(1, alpha);
    worst = std::max(worst, std::abs(inv - constants::frac_norming_integral_1d(alpha)) / inv);
  }
  return {worst <= 1e-8, "max rel gap " + fmt("%.2e", worst)};
}

Outcome fourier_symbol() {
  double worst = 0.0;
  for (double alpha : {0.5, 1.0, 1.5}) {
    const KernelSpec k = KernelSpec::fractional(alpha, Normalization::exact_C);
    for (double xi : {0.5, 1.0, 2.0}) worst = std::max(worst, rel(symbol(k, xi), std::pow(xi, alpha)));
  }
  return {worst <= 1e-6, "max rel error " + fmt("%.2e", worst)};
}

Outcome green_gauss() {
  const Interval omega{0.0, 1.0};
  const ScalarField bs = product(catalog::sine(pi), catalog::bump(0.5, 1.2));
  const ScalarField pairs[][2] = {
      {catalog::bump(0.5, 0.8), catalog::bump(0.3, 0.6)},
      {catalog::gaussian(0.4, 0.5), catalog::bump(0.6, 0.9)},
      {bs, catalog::bump(0.5, 1.0)},
      {catalog::bump(0.7, 1.0), catalog::gaussian(0.5, 0.4)},
      {catalog::bump(0.2, 0.6), catalog::bump(0.9, 0.7)},
  };
  double worst = 0.0;
  for (double alpha : {0.5, 1.0, 1.5}) {
    const KernelSpec k = KernelSpec::fractional(alpha, Normalization::exact_C);
    for (const auto& pv : pairs) worst = std::max(worst, green_gauss_residual(k, omega, pv[0], pv[1], 1.0));
  }
  return {worst <= 1e-6, "max residual " + fmt("%.2e", worst) + " over 5 pairs x 3 alpha"};
}

Outcome form_structure() {
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
  const MeshPtr m = build_mesh(0.0, 1.0, 128, 0.5);
  double sym = 0.0, psd = 0.0, row = 0.0;
  for (const KernelSpec& k : ks) {
    const GalerkinForms F = assemble_forms(m, k, 10, TailMode::drop);
    const double nrm = F.E.norm();
    sym = std::max(sym, (F.E - F.E.transpose()).norm() / nrm);
    row = std::max(row, (F.E * Eigen::VectorXd::Ones(F.E.cols())).norm() / nrm);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F.E, Eigen::EigenvaluesOnly);
    psd = std::min(psd, es.eigenvalues()[0] / nrm);
  }
  return {sym <= 1e-12 && row <= 1e-12 && psd >= -1e-10,
          std::to_string(ks.size()) + " kernels: asym " + fmt("%.1e", sym) + ", E1 " + fmt("%.1e", row) +
              ", min eig/|E| " + fmt("%.1e", psd)};
}

Outcome solver_exactness() {
  std::ostringstream d;
  bool ok = true;
  auto note = [&](const char* name, double e) {
    ok = ok && e <= 1e-10;
    d << name << " " << fmt("%.1e", e) << ", ";
  };
  {
    const FormsPtr F = forms(48, 0.7, TailMode::dirichlet_zero);
    const Mesh1D& m = *F->mesh;
    Eigen::VectorXd w = random_vector(static_cast<int>(m.size()), 3);
    for (int i = 0; i < static_cast<int>(m.size()); ++i) {
      if (i <= m.ia() || i >= m.ib()) w[i] = 0.0;
    }
    ComplementProblem q = problem(F, ProblemKind::dirichlet);
    q.load = Eigen::VectorXd(F->E * w);
    note("dirichlet", max_rel(solve(q).u.coeffs, w));
  }
  const FormsPtr F = forms(40, 1.1);
  const Mesh1D& m = *F->mesh;
  {
    Eigen::VectorXd w = random_vector(static_cast<int>(m.size()), 11);
    w.array() -= F->omega_mass.dot(w) / (m.b - m.a);
    ComplementProblem q = problem(F, ProblemKind::neumann);
    q.load = Eigen::VectorXd(F->E * w);
    note("neumann", max_rel(solve(q).u.coeffs, w));
  }
  {
    ComplementProblem q = problem(F, ProblemKind::robin);
    q.robin = RobinData{catalog::constant(3.0), std::nullopt};
    const Eigen::VectorXd w = random_vector(static_cast<int>(m.size()), 21);
    q.load = Eigen::VectorXd(problem_matrix(q) * w);
    note("robin", max_rel(solve(q).u.coeffs, w));
  }
  {
    std::vector<bool> left(m.size(), false);
    for (std::size_t i = 0; i < m.size(); ++i) left[i] = m.tags[i] == NodeTag::complement && m.nodes[i] < m.a;
    ComplementProblem q = problem(F, ProblemKind::mixed);
    q.dirichlet_set = left;
    Eigen::VectorXd w = random_vector(static_cast<int>(m.size()), 31);
    for (int i : mixed_fixed_nodes(m, left)) w[i] = 0.0;
    q.load = Eigen::VectorXd(F->E * w);
    note("mixed", max_rel(solve(q).u.coeffs, w));
  }
  {
    const Eigen::VectorXd ev = eigenvalues(*F, Condition::neumann);
    ComplementProblem q = problem(F, ProblemKind::helmholtz);
    q.lambda = 0.5 * (ev[1] + ev[2]);
    const Eigen::VectorXd w = random_vector(static_cast<int>(m.size()), 41);
    q.load = Eigen::VectorXd(problem_matrix(q) * w);
    note("helmholtz", max_rel(solve(q).u.coeffs, w));
  }
  {
    ComplementProblem bad = problem(F, ProblemKind::neumann);
    bad.f = catalog::constant(1.0);
    try {
      solve(bad);
      ok = false;
      d << "incompatible data accepted";
    } catch (const IncompatibleDataError& e) {
      const bool reported = std::abs(e.residual() - 1.0) < 1e-10;
      ok = ok && reported;
      d << "incompatible data rejected, residual " << fmt("%.6g", e.residual());
    }
  }
  return {ok, d.str()};
}

Outcome getoor_profile() {
  const double s = 0.5;
  const KernelSpec k = KernelSpec::fractional(2.0 * s, Normalization::exact_C);
  const ScalarField ustar = catalog::getoor(s);
  const double cstar = apply_L(k, ustar, 0.0);
  const int n = 512;
  const FormsPtr F = forms(-1.0, 1.0, n, k, TailMode::dirichlet_zero, 2.0 / n);
  ComplementProblem p = problem(F, ProblemKind::dirichlet);
  p.f = catalog::constant(cstar);
  const Solution sol = solve(p);
  const Eigen::VectorXd want = DiscreteField::interpolate(F->mesh, ustar).coeffs;
  const double e = l2_omega(*F, sol.u.coeffs - want) / l2_omega(*F, want);
  const double exact_c = std::tgamma(1.0 + s) * std::tgamma(0.5 + s) * std::pow(2.0, 2.0 * s) / std::sqrt(pi);
  return {e <= 0.05, "c* = " + fmt("%.8f", cstar) + " (closed form " + fmt("%.8f", exact_c) + "), rel L2 error " +
                         fmt("%.3e", e)};
}

Outcome spectral_axioms() {
  const FormsPtr F = forms(256, 1.3);
  const Spectrum ns = eig(*F, Condition::neumann, 6);
  const Mesh1D& m = *F->mesh;
  const Eigen::VectorXd c0 = ns.vectors.col(0).segment(m.ia(), m.n + 1);
  const double mu0 = std::abs(ns.values[0]);
  const double flat = (c0.array() - c0.mean()).abs().maxCoeff() / std::abs(c0.mean());
  double orth = (ns.vectors.transpose() * F->M * ns.vectors - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff();
  double res = rayleigh_residual(*F, ns);
  const Spectrum ds = eig(*F, Condition::dirichlet, 2);
  res = std::max(res, rayleigh_residual(*F, ds));
  bool order = true;
  bool lower = true;
  std::string ladder;
  for (double beta : {1.0, 10.0}) {
    const RobinData rb{catalog::constant(beta), std::nullopt};
    const Spectrum rs = eig(*F, Condition::robin, 2, &rb);
    res = std::max(res, rayleigh_residual(*F, rs));
    orth = std::max(orth,
                    (rs.vectors.transpose() * F->M * rs.vectors - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff());
    order = order && ns.values[1] <= rs.values[0] && rs.values[0] <= ds.values[0];
    lower = lower && ns.values[0] <= rs.values[0] && rs.values[0] <= ds.values[0];
    ladder += " gamma1(" + fmt("%g", beta) + ") = " + fmt("%.6g", rs.values[0]);
  }
  const bool ok = mu0 <= 1e-10 && flat <= 1e-10 && orth <= 1e-10 && res <= 1e-9 && order;
  return {ok, "mu0 " + fmt("%.1e", mu0) + ", orth " + fmt("%.1e", orth) + ", rayleigh " + fmt("%.1e", res) +
                  ", mu1 = " + fmt("%.6g", ns.values[1]) + ladder + ", lambda1 = " + fmt("%.6g", ds.values[0]) +
                  (order ? "" : ", mu1 <= gamma1 violated") + (lower ? ", mu0 <= gamma1 <= lambda1 holds" : "")};
}

Outcome evolution_laws() {
  const FormsPtr F = forms(64, 1.1);
  const Spectrum s = eig(*F, Condition::neumann);
  const Eigen::VectorXd u0 = DiscreteField::interpolate(F->mesh, catalog::gaussian(0.2, 0.3)).coeffs;
  const Trajectory t = evolve_heat(*F, s, u0, 2.0, 21);
  const double mass0 = F->omega_mass.dot(u0);
  const double mean = mass0 / (F->mesh->b - F->mesh->a);
  const Eigen::VectorXd d0 = u0.array() - mean;
  double mass = 0.0;
  bool dissip = true;
  for (std::size_t q = 0; q < t.times.size(); ++q) {
    mass = std::max(mass, std::abs(F->omega_mass.dot(t.states[q]) - mass0));
    const Eigen::VectorXd dq = t.states[q].array() - mean;
    dissip = dissip && l2_omega(*F, dq) <= std::exp(-s.values[1] * t.times[q]) * l2_omega(*F, d0) * (1.0 + 1e-12);
  }
  const ComplexTrajectory st = evolve_schrodinger(*F, s, u0, 3.0, 21);
  const double n0 = l2_omega(*F, u0);
  double sch = 0.0;
  for (const auto& z : st.states) sch = std::max(sch, std::abs(std::hypot(l2_omega(*F, z.real()), l2_omega(*F, z.imag())) - n0));
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(F->size());
  const Trajectory wt = evolve_wave(*F, s, s.vectors.col(2), zero, 3.0, 21);
  const std::vector<double> e = wave_energy(*F, s, s.vectors.col(2), zero, wt.times);
  double wav = 0.0;
  for (double v : e) wav = std::max(wav, std::abs(v - e[0]) / e[0]);
  return {mass <= 1e-10 && dissip && sch <= 1e-10 && wav <= 1e-8,
          "heat mass drift " + fmt("%.1e", mass) + (dissip ? ", dissipation bound holds" : ", dissipation bound broken") +
              ", schrodinger norm drift " + fmt("%.1e", sch) + ", wave energy drift " + fmt("%.1e", wav)};
}

Outcome dtn() {
  const FormsPtr F = forms(0.0, 1.0, 64, KernelSpec::fractional(1.2, Normalization::exact_C), TailMode::drop, 0.5);
  const DtNMap D0 = dtn_matrix(F, 0.0);
  const double n0 = D0.matrix.norm();
  const double sym0 = (D0.matrix - D0.matrix.transpose()).norm() / n0;
  const double one = (D0.matrix * Eigen::VectorXd::Ones(D0.matrix.cols())).norm() / n0;
  const double l1 = eig(*F, Condition::dirichlet, 1).values[0];
  const DtNMap D = dtn_matrix(F, 0.5 * l1);
  const double sym = (D.matrix - D.matrix.transpose()).norm() / D.matrix.norm();
  const WeightSpec ws{F->kernel, {0.0, 1.0}, WeightKind::integral};
  const DtNRobinLink link = dtn_robin_link(D, [ws](double x) { return weight_eval(ws, x); }, 2);
  double worst = 0.0;
  for (double r : link.residuals) worst = std::max(worst, r / link.scale);
  return {std::max(sym0, sym) <= 1e-10 && one <= 1e-10 && link.residuals.size() == 2 && worst <= 1e-6,
          "asym " + fmt("%.1e", std::max(sym0, sym)) + ", D1 " + fmt("%.1e", one) + ", link residual/scale " +
              fmt("%.1e", worst)};
}

Outcome bbm() {
  const Interval omega{0.0, 1.0};
  const double s = 0.99;
  const double ref_x = constants::sphere_area(1) / 2.0 * constants::bbm_constant(1, 2.0) * 1.0;
  const double ref_sin = constants::sphere_area(1) / 2.0 * constants::bbm_constant(1, 2.0) * pi * pi / 2.0;
  const double vx = bbm_value(omega, catalog::monomial(1), 2.0, s);
  const double vs = bbm_value(omega, catalog::sine(pi), 2.0, s);
  const double ex = rel(vx, ref_x);
  const double es = rel(vs, ref_sin);
  return {ex <= 0.03 && es <= 0.03, "u = x: " + fmt("%.6f", vx) + " vs " + fmt("%.6f", ref_x) + " (" +
                                        fmt("%.2f%%", 100 * ex) + "); u = sin(pi x): " + fmt("%.6f", vs) + " vs " +
                                        fmt("%.6f", ref_sin) + " (" + fmt("%.2f%%", 100 * es) + ")"};
}

struct Sweeps {
  Outcome eig;
  Outcome poincare;
};

Sweeps alpha_limit() {
  const KernelFamilyFn fam = fractional_family(Normalization::stable_a);
  const std::vector<double>& grid = default_alpha_grid();
  SweepMesh mesh;
  mesh.n = 512;
  std::vector<EigenSweepPoint> detail;
  const SweepReport er = eigen_convergence(Condition::dirichlet, fam, grid, 4, mesh, 1, &detail);
  const double lerr = er.points.back().rel_error;
  const double align = detail.back().alignment.minCoeff();
  std::ostringstream d;
  d << "lambda1(1.99) rel error " << fmt("%.3e", lerr) << ", min alignment " << fmt("%.6f", align);
  bool ok = lerr <= 0.1 && align >= 0.99;
  for (SolutionProblem p : {SolutionProblem::dirichlet_sine, SolutionProblem::neumann_cosine}) {
    const SweepReport sr = solution_convergence(p, fam, {1.2, 1.99}, mesh);
    const double ratio = sr.points.back().measured / sr.points.front().measured;
    ok = ok && ratio < 1.0 / 3.0;
    d << (p == SolutionProblem::dirichlet_sine ? "; dirichlet" : "; neumann") << " L2 error "
      << fmt("%.3e", sr.points.front().measured) << " -> " << fmt("%.3e", sr.points.back().measured) << " (ratio "
      << fmt("%.3e", ratio) << ")";
  }
  SweepMesh pm;
  pm.n = 128;
  const SweepReport pr = sharp_constant_sweep(fam, grid, pm);
  const double ratio = poincare_uniformity_ratio(pr);
  return {{ok, d.str()},
          {ratio <= 2.0, "max(1/mu1) / (1/mu1 at alpha = 1.99) = " + fmt("%.4f", ratio) + " over " +
                             std::to_string(grid.size()) + " alpha values"}};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli, const fs::path& work) {
  fs::remove_all(work);
  const std::vector<std::string> runs = {"solve --alpha 1.3 --n 64 --kind dirichlet --tail dirichlet_zero",
                                         "eigs --alpha 1.1 --n 64 --k 6 --condition neumann",
                                         "sweep solution --n 128"};
  const std::vector<std::vector<std::string>> files = {
      {"solution.csv"}, {"eigenvalues.csv", "eigenvectors.csv"}, {"sweep_solution.csv"}};
  int compared = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const char* tag : {"a", "b"}) {
      const fs::path out = work / (std::to_string(r) + tag);
      const std::string cmd = cli + " " + runs[r] + " --out " + out.string() + " > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + runs[r]};
    }
    for (const auto& f : files[r]) {
      const std::string a = slurp(work / (std::to_string(r) + "a") / f);
      if (a.empty() || a != slurp(work / (std::to_string(r) + "b") / f)) return {false, "differs: " + f};
      ++compared;
    }
  }
  return {true, std::to_string(compared) + " CSV files byte-identical across two runs"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string cli;
  std::string work = "acceptance_work";
  app.add_option("--cli", cli, "path to the command-line binary")->required();
  app.add_option("--work", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  auto report = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = limit_s <= 0.0 || secs <= limit_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%-4s %2d %-28s %s | %.2f s%s\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs,
                in_time ? "" : " (over time limit)");
    std::fflush(stdout);
  };

  report(1, "constant asymptotics", 1.0, constant_asymptotics);
  report(2, "constant-integral", 5.0, constant_integral);
  report(3, "fourier symbol", 10.0, fourier_symbol);
  report(4, "green-gauss identity", 60.0, green_gauss);
  report(5, "form structure", 30.0, form_structure);
  report(6, "solver exactness", 30.0, solver_exactness);
  report(7, "getoor profile", 120.0, getoor_profile);
  report(8, "spectral axioms", 60.0, spectral_axioms);
  report(9, "evolution laws", 30.0, evolution_laws);
  report(10, "dirichlet-to-neumann", 60.0, dtn);
  report(11, "bbm limit", 120.0, bbm);
  Sweeps sw;
  report(12, "alpha -> 2 convergence", 600.0, [&] {
    sw = alpha_limit();
    return sw.eig;
  });
  report(13, "poincare uniformity", 0.0, [&] { return sw.poincare; });
  report(14, "determinism", 0.0, [&] { return determinism(cli, work); });
  std::printf("%d of 14 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
