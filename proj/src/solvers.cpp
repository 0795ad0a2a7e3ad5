#include "nlcvp/solvers.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "nlcvp/errors.hpp"

namespace nlcvp {

const char* to_string(ProblemKind k) noexcept {
  switch (k) {
    case ProblemKind::dirichlet: return "dirichlet";
    case ProblemKind::neumann: return "neumann";
    case ProblemKind::robin: return "robin";
    case ProblemKind::mixed: return "mixed";
    case ProblemKind::helmholtz: return "helmholtz";
  }
  return "unknown";
}

namespace {

const GalerkinForms& forms_of(const ComplementProblem& p) {
  if (!p.forms) throw Error(ErrorKind::domain, "problem has no assembled forms");
  return *p.forms;
}

ScalarField abs_field(const ScalarField& u) {
  if (!u) return u;
  return ScalarField([u](double x) { return std::abs(u(x)); });
}

// flux data entering the load vector, by problem kind
const ScalarField& flux_field(const ComplementProblem& p) {
  static const ScalarField none;
  switch (p.kind) {
    case ProblemKind::neumann:
    case ProblemKind::robin: return p.g;
    case ProblemKind::mixed: return p.g_flux;
    case ProblemKind::helmholtz: return p.helmholtz_space == Condition::neumann ? p.g : none;
    case ProblemKind::dirichlet: return none;
  }
  return none;
}

Eigen::VectorXd load_vector(const ComplementProblem& p) {
  const GalerkinForms& F = forms_of(p);
  if (p.load) {
    if (p.load->size() != static_cast<Eigen::Index>(F.size())) {
      throw Error(ErrorKind::mesh_mismatch, "load vector length does not match the mesh");
    }
    return *p.load;
  }
  return assemble_load(*F.mesh, p.f, flux_field(p), p.g_weight);
}

Eigen::VectorXd trace_vector(const ComplementProblem& p) {
  const GalerkinForms& F = forms_of(p);
  if (p.trace) {
    if (p.trace->size() != static_cast<Eigen::Index>(F.size())) {
      throw Error(ErrorKind::mesh_mismatch, "trace vector length does not match the mesh");
    }
    return *p.trace;
  }
  Eigen::VectorXd t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(F.size()));
  if (p.g) {
    for (std::size_t i = 0; i < F.size(); ++i) t[i] = p.g(F.mesh->nodes[i]);
  }
  return t;
}

// far-field value of the Dirichlet data beyond T (dirichlet_const tail)
void add_tail_trace(const GalerkinForms& F, const Eigen::VectorXd& trace, Eigen::VectorXd& b) {
  if (F.tail_mode != TailMode::dirichlet_const) return;
  const double lo = trace[0];
  const double hi = trace[trace.size() - 1];
  if (std::abs(lo - hi) > 1e-12 * (1.0 + std::abs(hi))) {
    throw Error(ErrorKind::precondition,
                "dirichlet_const tail needs the same constant Dirichlet value at both ends of the collar");
  }
  b += hi * F.tail_load;
}

void require_free_far_field(const GalerkinForms& F, const char* who) {
  if (F.tail_mode != TailMode::drop && F.tail_mode != TailMode::free_const) {
    throw Error(ErrorKind::precondition,
                std::string(who) + ": the forms must be assembled with tail_mode drop or free_const");
  }
}

std::vector<int> active_nodes(const GalerkinForms& F, const Eigen::MatrixXd* extra = nullptr) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(F.size()); ++i) {
    if (F.active[i] || (extra && (*extra)(i, i) > 0.0)) out.push_back(i);
  }
  return out;
}

std::vector<int> complement_of(const std::vector<int>& U, std::size_t N) {
  std::vector<bool> in(N, false);
  for (int i : U) in[i] = true;
  std::vector<int> out;
  for (std::size_t i = 0; i < N; ++i) {
    if (!in[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

enum class Factor { llt, lu };

// A_UU u_U = b_U - A_UF t_F; the rest of u is t on F and zero elsewhere.
Solution linear_solve(const ComplementProblem& p, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                      const Eigen::VectorXd& t, std::vector<int> U, std::vector<int> Fx, Factor how) {
  const GalerkinForms& F = forms_of(p);
  if (U.empty()) throw Error(ErrorKind::domain, "solve: no unknowns");
  Eigen::VectorXd rhs = b(U);
  if (!Fx.empty()) rhs.noalias() -= A(U, Fx) * t(Fx);
  const Eigen::MatrixXd AUU = A(U, U);
  Eigen::VectorXd uU;
  if (how == Factor::llt) {
    Eigen::LLT<Eigen::MatrixXd> llt(AUU);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::singular_system, std::string(to_string(p.kind)) + ": system matrix is not positive definite");
    }
    uU = llt.solve(rhs);
  } else {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(AUU);
    uU = lu.solve(rhs);
    if (!uU.allFinite()) throw Error(ErrorKind::singular_system, "helmholtz: singular system");
  }
  Solution s;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(F.size()));
  for (int i : Fx) u[i] = t[i];
  for (std::size_t i = 0; i < U.size(); ++i) u[U[i]] = uU[i];
  s.residual = (AUU * uU - rhs).norm();
  s.u = DiscreteField(F.mesh, std::move(u));
  s.rhs = b;
  s.unknowns = std::move(U);
  s.fixed = std::move(Fx);
  return s;
}

double default_tol(const ComplementProblem& p) {
  if (p.compatibility_tol) return *p.compatibility_tol;
  const GalerkinForms& F = forms_of(p);
  double l1;
  if (p.load) {
    l1 = p.load->cwiseAbs().sum();
  } else {
    l1 = assemble_load(*F.mesh, abs_field(p.f), abs_field(flux_field(p)), p.g_weight).sum();
  }
  return 1e-10 * l1;
}

}  // namespace

double check_compatibility(const ComplementProblem& p) {
  if (p.kind != ProblemKind::neumann &&
      !(p.kind == ProblemKind::helmholtz && p.helmholtz_space == Condition::neumann)) {
    throw Error(ErrorKind::precondition, "compatibility applies to Neumann data only");
  }
  // the hat functions sum to one on T
  return std::abs(load_vector(p).sum());
}

Eigen::MatrixXd problem_matrix(const ComplementProblem& p) {
  const GalerkinForms& F = forms_of(p);
  switch (p.kind) {
    case ProblemKind::robin:
      if (!p.robin) throw Error(ErrorKind::precondition, "robin: beta data missing");
      return F.E + robin_mass(F, *p.robin);
    case ProblemKind::helmholtz: return F.E - p.lambda * F.M;
    default: return F.E;
  }
}

Solution solve_dirichlet(const ComplementProblem& p) {
  const GalerkinForms& F = forms_of(p);
  const Mesh1D& m = *F.mesh;
  const Eigen::VectorXd t = trace_vector(p);
  Eigen::VectorXd b = load_vector(p);
  add_tail_trace(F, t, b);
  std::vector<int> U = m.indices(NodeTag::interior);
  std::vector<int> Fx = complement_of(U, m.size());
  Solution s = linear_solve(p, F.E, b, t, std::move(U), std::move(Fx), Factor::llt);
  return s;
}

Solution solve_neumann(const ComplementProblem& p) {
  const GalerkinForms& F = forms_of(p);
  require_free_far_field(F, "neumann");
  const Eigen::VectorXd b = load_vector(p);
  const double res = std::abs(b.sum());
  const double tol = default_tol(p);
  if (res > tol) throw IncompatibleDataError(res, tol);

  const std::vector<int> U = active_nodes(F);
  const Eigen::VectorXd mU = F.omega_mass(U);
  const Eigen::MatrixXd EUU = F.E(U, U);
  // rank-one augmentation: E + s m m' is SPD and E u = b on compatible data
  const double scale = EUU.diagonal().maxCoeff() / mU.squaredNorm();
  Eigen::MatrixXd K = EUU;
  K.noalias() += scale * mU * mU.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::singular_system, "neumann: augmented system not definite");
  const Eigen::VectorXd bU = b(U);
  Eigen::VectorXd uU = llt.solve(bU);
  uU.array() -= mU.dot(uU) / mU.sum();

  Solution s;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(F.size()));
  for (std::size_t i = 0; i < U.size(); ++i) u[U[i]] = uU[i];
  s.residual = (EUU * uU - b(U)).norm();
  s.u = DiscreteField(F.mesh, std::move(u));
  s.rhs = b;
  s.unknowns = U;
  s.fixed = complement_of(U, F.size());
  s.compatibility = res;
  s.compatibility_tol = tol;
  return s;
}

Solution solve_robin(const ComplementProblem& p) {
  const GalerkinForms& F = forms_of(p);
  require_free_far_field(F, "robin");
  if (!p.robin) throw Error(ErrorKind::precondition, "robin: beta data missing");
  const Eigen::MatrixXd Mc = robin_mass(F, *p.robin);
  const Eigen::VectorXd b = load_vector(p);
  std::vector<int> U = active_nodes(F, &Mc);
  std::vector<int> Fx;
  return linear_solve(p, F.E + Mc, b, Eigen::VectorXd::Zero(b.size()), std::move(U), std::move(Fx), Factor::llt);
}

std::vector<int> mixed_fixed_nodes(const Mesh1D& m, const std::vector<bool>& D) {
  if (D.size() != m.size()) throw Error(ErrorKind::config, "mixed: dirichlet_set must have one flag per node");
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(m.size()); ++i) {
    const NodeTag t = m.tags[i];
    if (t == NodeTag::interior) {
      if (D[i]) throw Error(ErrorKind::precondition, "mixed: the Dirichlet set must lie in the complement");
      continue;
    }
    if (t == NodeTag::boundary) {
      const int nb = (i == m.ia()) ? i - 1 : i + 1;
      if (D[nb]) out.push_back(i);
      continue;
    }
    if (D[i]) out.push_back(i);
  }
  return out;
}

Solution solve_mixed(const ComplementProblem& p) {
  const GalerkinForms& F = forms_of(p);
  const Mesh1D& m = *F.mesh;
  std::vector<int> Fx = mixed_fixed_nodes(m, p.dirichlet_set);
  if (Fx.empty()) throw Error(ErrorKind::precondition, "mixed: the Dirichlet part of the complement is empty");
  const Eigen::VectorXd t = trace_vector(p);
  Eigen::VectorXd b = load_vector(p);
  add_tail_trace(F, t, b);
  std::vector<bool> fixed(m.size(), false);
  for (int i : Fx) fixed[i] = true;
  std::vector<int> U;
  for (int i = 0; i < static_cast<int>(m.size()); ++i) {
    if (!fixed[i] && F.active[i]) U.push_back(i);
  }
  return linear_solve(p, F.E, b, t, std::move(U), std::move(Fx), Factor::llt);
}

Solution solve_helmholtz(const ComplementProblem& p) {
  const GalerkinForms& F = forms_of(p);
  const Mesh1D& m = *F.mesh;
  const Condition space = p.helmholtz_space;
  if (space == Condition::robin) throw Error(ErrorKind::config, "helmholtz: space must be neumann or dirichlet");
  if (space == Condition::neumann) require_free_far_field(F, "helmholtz");

  const Eigen::MatrixXd A = F.E - p.lambda * F.M;
  const Eigen::VectorXd b = load_vector(p);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(b.size());
  std::vector<int> U;
  if (space == Condition::dirichlet) {
    t = trace_vector(p);
    U = m.indices(NodeTag::interior);
  } else {
    U = active_nodes(F);
  }
  std::vector<int> Fx = space == Condition::dirichlet ? complement_of(U, m.size()) : std::vector<int>{};

  const Eigen::VectorXd mu = eigenvalues(F, space);
  std::vector<int> J;
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    if (std::abs(p.lambda - mu[j]) <= 1e-8 * std::max(1.0, std::abs(mu[j]))) J.push_back(static_cast<int>(j));
  }
  if (J.empty()) return linear_solve(p, A, b, t, std::move(U), std::move(Fx), Factor::lu);

  // Fredholm branch: data must be orthogonal to the resonant eigenspace
  const Spectrum s = eig(F, space);
  Eigen::VectorXd r = b;
  if (!Fx.empty()) {
    Eigen::VectorXd tf = Eigen::VectorXd::Zero(b.size());
    for (int i : Fx) tf[i] = t[i];
    r -= A * tf;
    for (int i : Fx) r[i] = 0.0;
  }
  const Eigen::VectorXd proj = s.vectors.transpose() * r;
  double pn = 0.0;
  for (int j : J) pn += proj[j] * proj[j];
  pn = std::sqrt(pn);
  const double tol = p.compatibility_tol ? *p.compatibility_tol : 1e-10 * r.cwiseAbs().sum();
  if (pn > tol) throw ResonanceError(static_cast<std::size_t>(J.front()), mu[J.front()], pn);

  Eigen::VectorXd coef = Eigen::VectorXd::Zero(s.size());
  for (int k = 0; k < s.size(); ++k) {
    if (std::find(J.begin(), J.end(), k) == J.end()) coef[k] = proj[k] / (s.values[k] - p.lambda);
  }
  Eigen::VectorXd u = s.vectors * coef;
  // massless unknowns are not spanned by the modes when r has collar entries
  std::vector<int> C;
  std::vector<int> P;
  for (int i : U) (i >= m.ia() && i <= m.ib() ? P : C).push_back(i);
  if (!C.empty()) {
    Eigen::LLT<Eigen::MatrixXd> llt(A(C, C));
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::singular_system, "helmholtz: complement block");
    const Eigen::VectorXd rc = r(C) - A(C, P) * u(P);
    const Eigen::VectorXd uc = llt.solve(rc);
    u(C) = uc;
  }
  for (int i : Fx) u[i] = t[i];

  Solution sol;
  sol.resonant = true;
  sol.note = "lambda within 1e-8 of eigenvalue index " + std::to_string(J.front()) +
             "; minimal-norm solution orthogonal to the eigenspace";
  sol.residual = (A(U, Eigen::all) * u - b(U)).norm();
  sol.u = DiscreteField(F.mesh, std::move(u));
  sol.rhs = b;
  sol.unknowns = std::move(U);
  sol.fixed = std::move(Fx);
  return sol;
}

Solution solve(const ComplementProblem& p) {
  switch (p.kind) {
    case ProblemKind::dirichlet: return solve_dirichlet(p);
    case ProblemKind::neumann: return solve_neumann(p);
    case ProblemKind::robin: return solve_robin(p);
    case ProblemKind::mixed: return solve_mixed(p);
    case ProblemKind::helmholtz: return solve_helmholtz(p);
  }
  throw Error(ErrorKind::config, "unknown problem kind");
}

}  // namespace nlcvp
