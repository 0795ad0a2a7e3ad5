#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nlcvp/assembly.hpp"
#include "nlcvp/spectral.hpp"

namespace nlcvp {

enum class ProblemKind { dirichlet, neumann, robin, mixed, helmholtz };

const char* to_string(ProblemKind k) noexcept;

/// A stationary complement value problem on assembled forms.
///
/// f is the load on Omega. g is the Dirichlet trace (dirichlet, mixed D-part)
/// or the Neumann flux density (neumann, robin, helmholtz over neumann);
/// g_flux is the Neumann flux on the N-part of a mixed problem.
/// `load` and `trace` replace the quadrature of f/g by explicit nodal vectors
/// (load: integrals against the hat functions; trace: nodal values).
struct ComplementProblem {
  std::shared_ptr<const GalerkinForms> forms;
  ProblemKind kind = ProblemKind::dirichlet;
  ScalarField f;
  ScalarField g;
  ScalarField g_flux;
  std::optional<WeightSpec> g_weight;  // flux weighted by nu_K (weighted Neumann data)
  std::optional<RobinData> robin;
  double lambda = 0.0;
  Condition helmholtz_space = Condition::neumann;  // neumann or dirichlet
  std::vector<bool> dirichlet_set;  // mixed: per node, true for complement nodes in D
  std::optional<Eigen::VectorXd> load;
  std::optional<Eigen::VectorXd> trace;
  std::optional<double> compatibility_tol;  // default 1e-10 (|f|_1 + |g|_1)
};

struct Solution {
  DiscreteField u;
  Eigen::VectorXd rhs;        // load vector used (tail and trace terms excluded)
  std::vector<int> unknowns;  // nodes solved for
  std::vector<int> fixed;     // nodes prescribed
  double residual = 0.0;      // ||A u - b|| on the unknown rows
  std::optional<double> compatibility;  // neumann: |int f + int g|
  std::optional<double> compatibility_tol;
  bool resonant = false;      // helmholtz took the Fredholm branch
  std::string note;
};

/// |int_Omega f + int_{Omega^c} g| through the assembled load vector.
double check_compatibility(const ComplementProblem& p);

Solution solve_dirichlet(const ComplementProblem& p);
Solution solve_neumann(const ComplementProblem& p);
Solution solve_robin(const ComplementProblem& p);
Solution solve_mixed(const ComplementProblem& p);
Solution solve_helmholtz(const ComplementProblem& p);

/// Dispatch on p.kind.
Solution solve(const ComplementProblem& p);

/// Full-size matrix of the problem's bilinear form: E, E + Robin mass, or
/// E - lambda M.
Eigen::MatrixXd problem_matrix(const ComplementProblem& p);

/// Boundary node a (b) joins D exactly when the complement node next to it
/// does. Returns the fixed node set of a mixed problem.
std::vector<int> mixed_fixed_nodes(const Mesh1D& m, const std::vector<bool>& dirichlet_set);

}  // namespace nlcvp
