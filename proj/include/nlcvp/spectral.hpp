#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nlcvp/assembly.hpp"

namespace nlcvp {

enum class Condition { neumann, dirichlet, robin };

const char* to_string(Condition c) noexcept;

/// Robin data: beta >= 0 on the complement, weighted by nu_K. Without an
/// explicit weight the essential infimum over Omega of the forms' kernel is used.
struct RobinData {
  ScalarField beta;
  std::optional<WeightSpec> nu_K;
};

/// x -> beta(x) nu_K(x) on the complement, with the default weight filled in.
std::function<double(double)> robin_weight(const GalerkinForms& forms, const RobinData& robin);

/// Complement mass of beta nu_K. Throws precondition when beta is negative
/// somewhere or beta nu_K vanishes on the whole collar.
Eigen::MatrixXd robin_mass(const GalerkinForms& forms, const RobinData& robin);

struct Spectrum {
  Condition condition = Condition::neumann;
  MeshPtr mesh;
  Eigen::VectorXd values;   // non-decreasing
  Eigen::MatrixXd vectors;  // column j: full-length nodal coefficients of pair j
  std::vector<int> unknowns;  // rows on which a x = value M x holds
  std::shared_ptr<const Eigen::MatrixXd> robin_mass;  // robin only
  int dimension = 0;  // size of the full discrete eigenproblem
  bool mass_normalized = true;

  int size() const noexcept { return static_cast<int>(values.size()); }
  DiscreteField vector(int j) const { return DiscreteField(mesh, vectors.col(j)); }
};

/// First k eigenpairs (k <= 0: all) of a x = value M x, a = E (+ Robin mass).
/// Neumann and Robin eliminate the massless complement nodes by a Schur
/// complement; Dirichlet keeps interior nodes only. Each vector has its first
/// component above 1e-8 max|v| made positive.
Spectrum eig(const GalerkinForms& forms, Condition condition, int k = 0, const RobinData* robin = nullptr);

/// Eigenvalues only, all of them.
Eigen::VectorXd eigenvalues(const GalerkinForms& forms, Condition condition, const RobinData* robin = nullptr);

/// max over pairs of |value - v'av / v'Mv| and ||a v - value M v|| (unknown rows).
double rayleigh_residual(const GalerkinForms& forms, const Spectrum& s);

/// Same check for a single candidate pair.
double rayleigh_residual(const GalerkinForms& forms, const Spectrum& s, double value, const Eigen::VectorXd& v);

enum class PoincareMode { neumann_mean_zero, dirichlet_friedrichs };

/// 1 / mu_1 (mean-zero Poincare) or 1 / lambda_1 (Friedrichs).
double poincare_constant(const GalerkinForms& forms, PoincareMode mode);

/// Discrete Dirichlet-to-Neumann map on the fixed nodes (boundary plus active
/// complement): D = S_CC - S_CI S_II^{-1} S_IC with S = E - lambda M.
struct DtNMap {
  double lambda = 0.0;
  Eigen::MatrixXd matrix;
  std::vector<int> nodes;     // C
  std::vector<int> interior;  // I
  Eigen::MatrixXd harmonic;   // -S_II^{-1} S_IC
  std::shared_ptr<const GalerkinForms> forms;

  /// lambda-harmonic extension of trace values g (indexed like nodes).
  Eigen::VectorXd extend(const Eigen::VectorXd& g) const;
};

DtNMap dtn_matrix(std::shared_ptr<const GalerkinForms> forms, double lambda);

/// beta_j with -D g = beta_j W g, W the complement mass of the given weight
/// restricted to the DtN nodes, and the Robin residual
/// ||(E + beta_j W - lambda M) u_g|| of the harmonic extension u_g.
struct DtNRobinLink {
  Eigen::VectorXd betas;
  Eigen::VectorXd residuals;
  double scale = 0.0;  // max |E_ij|
};

DtNRobinLink dtn_robin_link(const DtNMap& map, const std::function<double(double)>& weight, int count);

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;  // full-length nodal coefficients
  bool truncated = false;               // spectrum had fewer pairs than the dimension
  std::string warning;
};

struct ComplexTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> states;
  bool truncated = false;
  std::string warning;
};

/// Load pieces: load vector active from `start` until the next piece starts.
struct LoadPiece {
  double start = 0.0;
  Eigen::VectorXd load;
};

/// Modal coefficients (phi_k, u)_M of a nodal vector.
Eigen::VectorXd modal_coefficients(const GalerkinForms& forms, const Spectrum& s, const Eigen::VectorXd& u);
/// Sum of c_k phi_k.
Eigen::VectorXd modal_synthesis(const Spectrum& s, const Eigen::VectorXd& c);

/// samples >= 2 equally spaced times on [0, T]. Duhamel terms are integrated
/// exactly per mode for piecewise-constant loads.
Trajectory evolve_heat(const GalerkinForms& forms, const Spectrum& s, const Eigen::VectorXd& u0, double T, int samples,
                       const std::vector<LoadPiece>& loads = {});

/// modes c_k e^{i mu_k t}
ComplexTrajectory evolve_schrodinger(const GalerkinForms& forms, const Spectrum& s, const Eigen::VectorXd& u0,
                                     double T, int samples);

/// modes c_k cos(sqrt(mu_k) t) + d_k sin(sqrt(mu_k) t) / sqrt(mu_k); the
/// zero mode evolves as c + d t.
Trajectory evolve_wave(const GalerkinForms& forms, const Spectrum& s, const Eigen::VectorXd& u0,
                       const Eigen::VectorXd& u1, double T, int samples);

/// ||du/dt||_M^2 + u'Eu at the given times, from the reconstructed nodal vectors.
std::vector<double> wave_energy(const GalerkinForms& forms, const Spectrum& s, const Eigen::VectorXd& u0,
                                const Eigen::VectorXd& u1, const std::vector<double>& times);

}  // namespace nlcvp
