#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nlcvp/field.hpp"
#include "nlcvp/kernels.hpp"
#include "nlcvp/spectral.hpp"

namespace nlcvp {

enum class Verdict { converging, non_monotone_converging, failed };

const char* to_string(Verdict v) noexcept;

struct SweepPoint {
  double parameter = 0.0;
  double measured = 0.0;
  double reference = 0.0;
  double rel_error = 0.0;  // |measured - reference| / |reference|, or absolute when reference is 0
};

struct SweepReport {
  std::string experiment;
  std::string parameter_name;
  std::vector<SweepPoint> points;
  std::string reference_provenance;  // how the reference values were obtained
  Verdict verdict = Verdict::failed;
  std::vector<std::string> notes;
  std::optional<double> extrapolated;  // limit estimate where meaningful
};

/// Trend verdict on the error column ordered by the grid: converging when the
/// last error is below `factor` times the first and errors never increase,
/// non-monotone when only the first condition holds.
Verdict trend_verdict(const std::vector<double>& errors, double factor);

/// Parameter -> kernel.
using KernelFamilyFn = std::function<KernelSpec(double)>;

/// alpha -> KernelSpec::fractional(alpha, norm).
KernelFamilyFn fractional_family(Normalization norm);

const std::vector<double>& default_alpha_grid();

/// P1 finite elements for -(a u')' on an interval.
struct LocalOracle {
  double a = 0.0;
  double b = 1.0;
  int n = 8;
  double coefficient = 1.0;
  Eigen::VectorXd nodes;
  Eigen::MatrixXd K;  // stiffness, coefficient included
  Eigen::MatrixXd M;
};

LocalOracle make_local_oracle(double a, double b, int n, double coefficient);

enum class LocalKind { dirichlet, neumann };

/// Dirichlet: u = g_left / g_right at the ends. Neumann: outward fluxes
/// a u'(b) = g_right and -a u'(a) = g_left, solution normalized to mean zero.
Eigen::VectorXd local_solve(const LocalOracle& o, LocalKind kind, const ScalarField& f, double g_left = 0.0,
                            double g_right = 0.0);

/// Dirichlet pairs are padded with zeros at the end nodes. Vectors are
/// M-normalized with the same sign convention as eig().
struct LocalSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

LocalSpectrum local_eigs(const LocalOracle& o, LocalKind kind, int k);

/// a = lim_{alpha -> 2} integral over |h| < delta of h^2 nu_alpha(h), by
/// Richardson extrapolation in t = 2 - alpha over the three grid points
/// closest to 2. The local coefficient of the half-weighted form is a / 2.
double limit_coefficient(const KernelFamilyFn& family, double delta, const std::vector<double>& alpha_grid);

/// (1 - s) double integral over Omega x Omega of |u(x) - u(y)|^p / |x - y|^{1 + s p}.
double bbm_value(const Interval& omega, const ScalarField& u, double p, double s);

/// Reference: (|S^0| / p) K_{1,p} integral of |u'|^p; measured value per s.
SweepReport bbm_sweep(const Interval& omega, const ScalarField& u, const ScalarField& du, double p,
                      const std::vector<double>& s_grid);

/// Integral over Omega x Omega^c of (u(x) - u(y))^2 nu(x - y).
double cross_energy(const KernelSpec& k, const Interval& omega, const ScalarField& u);

/// Cross energy per grid parameter; converging means it tends to zero along the grid.
SweepReport collapse_check(const Interval& omega, const ScalarField& u, const KernelFamilyFn& family,
                           const std::vector<double>& grid, const std::string& parameter_name = "alpha");

struct SweepMesh {
  double a = 0.0;
  double b = 1.0;
  int n = 128;
  // 0: 2 (b - a) for Neumann problems; Dirichlet problems with constant data
  // then use a one-element collar with the exact far-field tail term
  double collar_R = 0.0;
  int quad_order = 10;
  int threads = 1;
};

/// mu_1(alpha) (Neumann) against the local oracle mu_1 with coefficient
/// limit_coefficient / 2; notes record max 1/mu_1 over the grid against
/// 2 / mu_1 at the finest alpha.
SweepReport sharp_constant_sweep(const KernelFamilyFn& family, const std::vector<double>& alpha_grid,
                                 const SweepMesh& mesh);

/// max over the grid of 1/mu_1 divided by 1/mu_1 at the largest parameter.
double poincare_uniformity_ratio(const SweepReport& sharp);

enum class SolutionProblem { dirichlet_sine, neumann_cosine, dirichlet_constant };

/// L2(Omega) distance between the nonlocal solution and the local oracle.
SweepReport solution_convergence(SolutionProblem problem, const KernelFamilyFn& family,
                                 const std::vector<double>& alpha_grid, const SweepMesh& mesh);

struct EigenSweepPoint {
  double alpha = 0.0;
  Eigen::VectorXd values;
  Eigen::VectorXd local_values;
  Eigen::VectorXd alignment;  // |<phi, phi_local>_M|
};

/// Mode index `mode` (Neumann counts from 0, Dirichlet from 1) compared with
/// the oracle; per-alpha detail in `detail`.
SweepReport eigen_convergence(Condition condition, const KernelFamilyFn& family, const std::vector<double>& alpha_grid,
                              int k, const SweepMesh& mesh, int mode = 1,
                              std::vector<EigenSweepPoint>* detail = nullptr);

}  // namespace nlcvp
