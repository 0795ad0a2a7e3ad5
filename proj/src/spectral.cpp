#include "nlcvp/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "nlcvp/errors.hpp"
#include "nlcvp/simd/linalg.hpp"

namespace nlcvp {

const char* to_string(Condition c) noexcept {
  switch (c) {
    case Condition::neumann: return "neumann";
    case Condition::dirichlet: return "dirichlet";
    case Condition::robin: return "robin";
  }
  return "unknown";
}

namespace {

Eigen::VectorXd matvec(const Eigen::MatrixXd& A, const Eigen::VectorXd& x) {
  Eigen::VectorXd y(A.rows());
  simd::active().gemv(A.data(), static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(A.cols()),
                      static_cast<std::size_t>(A.rows()), x.data(), y.data());
  return y;
}

Eigen::VectorXd matvec_t(const Eigen::MatrixXd& A, const Eigen::VectorXd& x) {
  Eigen::VectorXd y(A.cols());
  simd::active().gemv_t(A.data(), static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(A.cols()),
                        static_cast<std::size_t>(A.rows()), x.data(), y.data());
  return y;
}

double quad_form(const Eigen::MatrixXd& A, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const auto n = static_cast<std::size_t>(A.rows());
  return simd::active().quad_form(A.data(), n, n, x.data(), y.data());
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double big = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-8 * big) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

struct Partition {
  std::vector<int> unknowns;  // rows where the equation holds
  std::vector<int> massive;   // P: nodes carrying L2(Omega) mass
  std::vector<int> massless;  // C: eliminated
};

Partition partition(const GalerkinForms& F, Condition c, const Eigen::MatrixXd* Mc) {
  const Mesh1D& m = *F.mesh;
  Partition p;
  if (c == Condition::dirichlet) {
    p.unknowns = m.indices(NodeTag::interior);
    p.massive = p.unknowns;
    return p;
  }
  for (int i = 0; i < static_cast<int>(m.size()); ++i) {
    const bool robin_active = Mc && (*Mc)(i, i) > 0.0;
    if (!F.active[i] && !robin_active) continue;
    p.unknowns.push_back(i);
    if (i >= m.ia() && i <= m.ib()) {
      p.massive.push_back(i);
    } else {
      p.massless.push_back(i);
    }
  }
  return p;
}

// Reduced pencil on the massive nodes plus the map back to full vectors.
struct Pencil {
  Eigen::MatrixXd S;
  Eigen::MatrixXd B;
  Eigen::MatrixXd lift;  // massless values = lift * massive values
  Partition part;
};

Pencil reduce(const GalerkinForms& F, const Eigen::MatrixXd& A, Condition c, const Eigen::MatrixXd* Mc) {
  Pencil pen;
  pen.part = partition(F, c, Mc);
  const auto& P = pen.part.massive;
  const auto& C = pen.part.massless;
  pen.S = A(P, P);
  pen.B = F.M(P, P);
  if (!C.empty()) {
    Eigen::LLT<Eigen::MatrixXd> llt(A(C, C));
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::singular_system, "eig: complement block is not positive definite");
    }
    const Eigen::MatrixXd ACP = A(C, P);
    pen.lift = -llt.solve(ACP);
    pen.S.noalias() += A(P, C) * pen.lift;
    pen.S = 0.5 * (pen.S + pen.S.transpose()).eval();
  }
  return pen;
}

Eigen::MatrixXd operator_matrix(const GalerkinForms& F, Condition c, const RobinData* robin,
                                std::shared_ptr<const Eigen::MatrixXd>& Mc) {
  if (c == Condition::robin) {
    if (!robin) throw Error(ErrorKind::precondition, "eig: robin condition needs beta data");
    Mc = std::make_shared<const Eigen::MatrixXd>(robin_mass(F, *robin));
    return F.E + *Mc;
  }
  return F.E;
}

}  // namespace

std::function<double(double)> robin_weight(const GalerkinForms& forms, const RobinData& robin) {
  if (!robin.beta) throw Error(ErrorKind::precondition, "robin: beta is missing");
  WeightSpec w = robin.nu_K ? *robin.nu_K
                            : WeightSpec{forms.kernel, {forms.mesh->a, forms.mesh->b}, WeightKind::essinf};
  ScalarField beta = robin.beta;
  return [beta, w](double x) {
    const double b = beta(x);
    if (b < 0.0) throw Error(ErrorKind::precondition, "robin: beta must be nonnegative");
    return b == 0.0 ? 0.0 : b * weight_eval(w, x);
  };
}

Eigen::MatrixXd robin_mass(const GalerkinForms& forms, const RobinData& robin) {
  Eigen::MatrixXd Mc = assemble_complement_mass(*forms.mesh, robin_weight(forms, robin));
  if (!(Mc.trace() > 0.0)) {
    throw Error(ErrorKind::precondition, "robin: beta * nu_K vanishes on the complement (form not coercive)");
  }
  return Mc;
}

Spectrum eig(const GalerkinForms& forms, Condition condition, int k, const RobinData* robin) {
  Spectrum s;
  s.condition = condition;
  s.mesh = forms.mesh;
  const Eigen::MatrixXd A = operator_matrix(forms, condition, robin, s.robin_mass);
  const Pencil pen = reduce(forms, A, condition, s.robin_mass.get());
  const int n = static_cast<int>(pen.S.rows());
  if (n == 0) throw Error(ErrorKind::domain, "eig: no unknowns");
  if (k > n) throw Error(ErrorKind::domain, "eig: requested more pairs than unknowns");
  if (k <= 0) k = n;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(pen.S, pen.B,
                                                                Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success) throw Error(ErrorKind::singular_system, "eig: eigensolver failed");
  s.dimension = n;
  s.unknowns = pen.part.unknowns;
  s.values = ges.eigenvalues().head(k);
  const int N = static_cast<int>(forms.size());
  s.vectors = Eigen::MatrixXd::Zero(N, k);
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd x = ges.eigenvectors().col(j);
    fix_sign(x);
    for (std::size_t i = 0; i < pen.part.massive.size(); ++i) s.vectors(pen.part.massive[i], j) = x[i];
    if (!pen.part.massless.empty()) {
      const Eigen::VectorXd y = pen.lift * x;
      for (std::size_t i = 0; i < pen.part.massless.size(); ++i) s.vectors(pen.part.massless[i], j) = y[i];
    }
  }
  return s;
}

Eigen::VectorXd eigenvalues(const GalerkinForms& forms, Condition condition, const RobinData* robin) {
  std::shared_ptr<const Eigen::MatrixXd> Mc;
  const Eigen::MatrixXd A = operator_matrix(forms, condition, robin, Mc);
  const Pencil pen = reduce(forms, A, condition, Mc.get());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(pen.S, pen.B, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success) throw Error(ErrorKind::singular_system, "eig: eigensolver failed");
  return ges.eigenvalues();
}

double rayleigh_residual(const GalerkinForms& forms, const Spectrum& s, double value, const Eigen::VectorXd& v) {
  Eigen::VectorXd av = matvec(forms.E, v);
  if (s.robin_mass) av += matvec(*s.robin_mass, v);
  const Eigen::VectorXd mv = matvec(forms.M, v);
  const double q = v.dot(av) / v.dot(mv);
  double r = 0.0;
  for (int i : s.unknowns) r += (av[i] - value * mv[i]) * (av[i] - value * mv[i]);
  return std::max(std::abs(value - q), std::sqrt(r));
}

double rayleigh_residual(const GalerkinForms& forms, const Spectrum& s) {
  double worst = 0.0;
  for (int j = 0; j < s.size(); ++j) {
    worst = std::max(worst, rayleigh_residual(forms, s, s.values[j], s.vectors.col(j)));
  }
  return worst;
}

double poincare_constant(const GalerkinForms& forms, PoincareMode mode) {
  if (mode == PoincareMode::neumann_mean_zero) {
    const Eigen::VectorXd v = eigenvalues(forms, Condition::neumann);
    if (v.size() < 2 || !(v[1] > 0.0)) throw Error(ErrorKind::singular_system, "poincare: no positive mu_1");
    return 1.0 / v[1];
  }
  const Eigen::VectorXd v = eigenvalues(forms, Condition::dirichlet);
  if (!(v[0] > 0.0)) throw Error(ErrorKind::singular_system, "poincare: lambda_1 is not positive");
  return 1.0 / v[0];
}

Eigen::VectorXd DtNMap::extend(const Eigen::VectorXd& g) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(forms->size()));
  const Eigen::VectorXd ui = harmonic * g;
  for (std::size_t i = 0; i < nodes.size(); ++i) u[nodes[i]] = g[i];
  for (std::size_t i = 0; i < interior.size(); ++i) u[interior[i]] = ui[i];
  return u;
}

DtNMap dtn_matrix(std::shared_ptr<const GalerkinForms> forms, double lambda) {
  if (!forms) throw Error(ErrorKind::domain, "dtn: null forms");
  const GalerkinForms& F = *forms;
  const Mesh1D& m = *F.mesh;
  if (lambda > 0.0) {
    const Eigen::VectorXd ev = eigenvalues(F, Condition::dirichlet);
    for (Eigen::Index j = 0; j < ev.size(); ++j) {
      if (std::abs(lambda - ev[j]) <= 1e-8 * std::max(1.0, std::abs(ev[j]))) {
        throw ResonanceError(static_cast<std::size_t>(j), ev[j], 0.0);
      }
    }
  }
  DtNMap D;
  D.lambda = lambda;
  D.forms = forms;
  D.interior = m.indices(NodeTag::interior);
  for (int i = 0; i < static_cast<int>(m.size()); ++i) {
    if (m.tags[i] != NodeTag::interior && F.active[i]) D.nodes.push_back(i);
  }
  const Eigen::MatrixXd S = F.E - lambda * F.M;
  const auto& I = D.interior;
  const auto& C = D.nodes;
  const Eigen::MatrixXd SIC = S(I, C);
  if (lambda <= 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(S(I, I));
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::singular_system, "dtn: interior block not definite");
    D.harmonic = -llt.solve(SIC);
  } else {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(S(I, I));
    D.harmonic = -lu.solve(SIC);
  }
  D.matrix = S(C, C);
  D.matrix.noalias() += SIC.transpose() * D.harmonic;
  return D;
}

DtNRobinLink dtn_robin_link(const DtNMap& map, const std::function<double(double)>& weight, int count) {
  const GalerkinForms& F = *map.forms;
  const Eigen::MatrixXd Wfull = assemble_complement_mass(*F.mesh, weight);
  const Eigen::MatrixXd W = Wfull(map.nodes, map.nodes);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(-map.matrix, W,
                                                                Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success) {
    throw Error(ErrorKind::singular_system, "dtn: weighted eigenproblem failed (weight vanishes on a DtN node?)");
  }
  count = std::min<int>(count, static_cast<int>(ges.eigenvalues().size()));
  DtNRobinLink link;
  link.betas.resize(count);
  link.residuals.resize(count);
  link.scale = F.E.cwiseAbs().maxCoeff();
  for (int j = 0; j < count; ++j) {
    const double beta = ges.eigenvalues()[j];
    const Eigen::VectorXd u = map.extend(ges.eigenvectors().col(j));
    const Eigen::VectorXd r = matvec(F.E, u) + beta * matvec(Wfull, u) - map.lambda * matvec(F.M, u);
    link.betas[j] = beta;
    link.residuals[j] = r.norm();
  }
  return link;
}

Eigen::VectorXd modal_coefficients(const GalerkinForms& forms, const Spectrum& s, const Eigen::VectorXd& u) {
  return matvec_t(s.vectors, matvec(forms.M, u));
}

Eigen::VectorXd modal_synthesis(const Spectrum& s, const Eigen::VectorXd& c) { return matvec(s.vectors, c); }

namespace {

std::vector<double> sample_times(double T, int samples) {
  if (samples < 2) throw Error(ErrorKind::domain, "evolve: need at least two samples");
  if (!(T > 0.0)) throw Error(ErrorKind::domain, "evolve: final time must be positive");
  std::vector<double> t(samples);
  for (int j = 0; j < samples; ++j) t[j] = T * j / (samples - 1);
  return t;
}

template <class Traj>
void mark_truncation(const Spectrum& s, Traj& tr) {
  if (s.size() < s.dimension) {
    tr.truncated = true;
    tr.warning = "spectrum truncated: " + std::to_string(s.size()) + " of " + std::to_string(s.dimension) + " modes";
  }
}

// integral over [a, b] of exp(-mu (t - s)) ds, for a <= b <= t
double duhamel(double mu, double t, double a, double b) {
  if (mu == 0.0) return b - a;
  return std::exp(-mu * (t - b)) * (-std::expm1(-mu * (b - a))) / mu;
}

}  // namespace

Trajectory evolve_heat(const GalerkinForms& forms, const Spectrum& s, const Eigen::VectorXd& u0, double T, int samples,
                       const std::vector<LoadPiece>& loads) {
  Trajectory tr;
  tr.times = sample_times(T, samples);
  mark_truncation(s, tr);
  const Eigen::VectorXd c0 = modal_coefficients(forms, s, u0);
  std::vector<Eigen::VectorXd> fk;
  for (const auto& p : loads) fk.push_back(matvec_t(s.vectors, p.load));
  for (double t : tr.times) {
    Eigen::VectorXd c(s.size());
    for (int k = 0; k < s.size(); ++k) {
      const double mu = s.values[k];
      double v = std::exp(-mu * t) * c0[k];
      for (std::size_t p = 0; p < loads.size(); ++p) {
        const double a = std::max(0.0, loads[p].start);
        const double b = std::min(t, p + 1 < loads.size() ? loads[p + 1].start : t);
        if (b > a) v += fk[p][k] * duhamel(mu, t, a, b);
      }
      c[k] = v;
    }
    tr.states.push_back(modal_synthesis(s, c));
  }
  return tr;
}

ComplexTrajectory evolve_schrodinger(const GalerkinForms& forms, const Spectrum& s, const Eigen::VectorXd& u0,
                                     double T, int samples) {
  ComplexTrajectory tr;
  tr.times = sample_times(T, samples);
  mark_truncation(s, tr);
  const Eigen::VectorXd c0 = modal_coefficients(forms, s, u0);
  for (double t : tr.times) {
    Eigen::VectorXd re(s.size());
    Eigen::VectorXd im(s.size());
    for (int k = 0; k < s.size(); ++k) {
      re[k] = c0[k] * std::cos(s.values[k] * t);
      im[k] = c0[k] * std::sin(s.values[k] * t);
    }
    const Eigen::VectorXd ur = modal_synthesis(s, re);
    const Eigen::VectorXd ui = modal_synthesis(s, im);
    Eigen::VectorXcd u(ur.size());
    for (Eigen::Index i = 0; i < ur.size(); ++i) u[i] = {ur[i], ui[i]};
    tr.states.push_back(std::move(u));
  }
  return tr;
}

namespace {

// position and velocity coefficients of one wave mode
void wave_mode(double mu, double c, double d, double t, double& pos, double& vel) {
  const double w = std::sqrt(std::max(mu, 0.0));
  if (w == 0.0) {
    pos = c + d * t;
    vel = d;
    return;
  }
  pos = c * std::cos(w * t) + d * std::sin(w * t) / w;
  vel = -c * w * std::sin(w * t) + d * std::cos(w * t);
}

}  // namespace

Trajectory evolve_wave(const GalerkinForms& forms, const Spectrum& s, const Eigen::VectorXd& u0,
                       const Eigen::VectorXd& u1, double T, int samples) {
  Trajectory tr;
  tr.times = sample_times(T, samples);
  mark_truncation(s, tr);
  const Eigen::VectorXd c0 = modal_coefficients(forms, s, u0);
  const Eigen::VectorXd d0 = modal_coefficients(forms, s, u1);
  for (double t : tr.times) {
    Eigen::VectorXd c(s.size());
    for (int k = 0; k < s.size(); ++k) {
      double vel;
      wave_mode(s.values[k], c0[k], d0[k], t, c[k], vel);
    }
    tr.states.push_back(modal_synthesis(s, c));
  }
  return tr;
}

std::vector<double> wave_energy(const GalerkinForms& forms, const Spectrum& s, const Eigen::VectorXd& u0,
                                const Eigen::VectorXd& u1, const std::vector<double>& times) {
  const Eigen::VectorXd c0 = modal_coefficients(forms, s, u0);
  const Eigen::VectorXd d0 = modal_coefficients(forms, s, u1);
  std::vector<double> out;
  for (double t : times) {
    Eigen::VectorXd p(s.size());
    Eigen::VectorXd v(s.size());
    for (int k = 0; k < s.size(); ++k) wave_mode(s.values[k], c0[k], d0[k], t, p[k], v[k]);
    const Eigen::VectorXd u = modal_synthesis(s, p);
    const Eigen::VectorXd ut = modal_synthesis(s, v);
    out.push_back(quad_form(forms.M, ut, ut) + quad_form(forms.E, u, u));
  }
  return out;
}

}  // namespace nlcvp
