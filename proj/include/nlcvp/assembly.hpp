#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nlcvp/field.hpp"
#include "nlcvp/kernels.hpp"
#include "nlcvp/mesh.hpp"

namespace nlcvp {

/// How pairs (x in Omega, y beyond the collar) enter E.
///   drop            ignored
///   dirichlet_zero  u = 0 out there
///   dirichlet_const u = c out there (c supplied by the solver)
///   free_const      u is one free constant per side, eliminated exactly
enum class TailMode { drop, dirichlet_zero, dirichlet_const, free_const };

const char* to_string(TailMode t) noexcept;

/// Assembled Galerkin data over all mesh nodes (collar included).
struct GalerkinForms {
  MeshPtr mesh;
  KernelSpec kernel = KernelSpec::fractional(1.0, Normalization::exact_C);
  int quad_order = 10;
  TailMode tail_mode = TailMode::drop;
  Eigen::MatrixXd E;        // discrete form, far-field tail included
  Eigen::MatrixXd E_tail;   // far-field part of E (zero for drop)
  Eigen::VectorXd tail_load;  // integral over Omega of phi_i * tau (the per-node far-field coefficients)
  Eigen::MatrixXd M;        // L2(Omega) mass
  Eigen::VectorXd omega_mass;  // integral over Omega of phi_i
  std::vector<bool> active;    // node interacts with Omega (non-zero diagonal or in the closure)

  std::size_t size() const noexcept { return mesh ? mesh->size() : 0; }
};

/// Local element-pair matrices, indexed by the element offset k = e' - e.
/// offset 0 is 2x2, offset 1 is 3x3 (shared node), larger offsets are 4x4.
struct PairTable {
  double h = 0.0;
  std::vector<Eigen::MatrixXd> A;
};

PairTable pair_table(const KernelSpec& k, double h, int max_offset, int quad_order);

/// quad_order: Gauss-Legendre points per smooth piece of the offset integrals.
GalerkinForms assemble_forms(MeshPtr mesh, const KernelSpec& kernel, int quad_order = 10,
                             TailMode tail_mode = TailMode::drop, int threads = 1);

/// Matrix of |u|_V^2 = double integral over Omega x T of (u(x) - u(y))^2 nu.
Eigen::MatrixXd assemble_v_form(MeshPtr mesh, const KernelSpec& kernel, int quad_order = 10);

/// Weighted complement mass: integral over T \ Omega of phi_i phi_j W.
/// Nodes whose support lies in Omega get zero rows.
Eigen::MatrixXd assemble_complement_mass(const Mesh1D& mesh, const std::function<double(double)>& weight,
                                         int quad_order = 8);

/// Load vector: integral over Omega of f phi_i plus integral over T \ Omega of
/// g phi_i (times the weight when given). Empty fields contribute nothing.
Eigen::VectorXd assemble_load(const Mesh1D& mesh, const ScalarField& f, const ScalarField& g,
                              const std::optional<WeightSpec>& g_weight = std::nullopt, int quad_order = 8);

/// u^T E u
double seminorm_E(const GalerkinForms& forms, const DiscreteField& u);

/// L2(Omega) norm through the mass matrix.
double l2_omega(const GalerkinForms& forms, const Eigen::VectorXd& u);

/// Dense matrix as a coordinate-format Matrix Market file (entries with
/// |a| > drop_below only). Symmetric matrices store the lower triangle.
void write_matrix_market(std::ostream& os, const Eigen::MatrixXd& A, bool symmetric, double drop_below = 0.0,
                         const std::string& comment = "");

}  // namespace nlcvp
