#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "nlcvp/field.hpp"

namespace nlcvp {

enum class NodeTag { interior, boundary, complement };

/// Uniform mesh of the universe T = [a - R, b + R] where R is the collar
/// width snapped outward to a multiple of h.
struct Mesh1D {
  double a = 0.0;
  double b = 1.0;
  double h = 0.125;
  double collar_R = 1.0;
  int n = 8;        // elements in (a, b)
  int collar_n = 8; // elements in each collar
  std::vector<double> nodes;
  std::vector<NodeTag> tags;

  std::size_t size() const noexcept { return nodes.size(); }
  int elements() const noexcept { return static_cast<int>(nodes.size()) - 1; }
  int ia() const noexcept { return collar_n; }      // node index of a
  int ib() const noexcept { return collar_n + n; }  // node index of b
  double T_lo() const noexcept { return nodes.front(); }
  double T_hi() const noexcept { return nodes.back(); }
  bool element_in_omega(int e) const noexcept { return e >= ia() && e < ib(); }
  /// Indices of nodes with the given tag, ascending.
  std::vector<int> indices(NodeTag t) const;
  /// Interior plus boundary nodes.
  std::vector<int> closure_indices() const;
  bool same_as(const Mesh1D& o) const noexcept;
};

using MeshPtr = std::shared_ptr<const Mesh1D>;

/// n_interior is the number of elements in (a, b).
MeshPtr build_mesh(double a, double b, int n_interior, double collar_R);

/// P1 function on a mesh; zero outside T.
struct DiscreteField {
  MeshPtr mesh;
  Eigen::VectorXd coeffs;

  DiscreteField() = default;
  DiscreteField(MeshPtr m, Eigen::VectorXd c);

  double operator()(double x) const;
  /// Nodal interpolant of a function.
  static DiscreteField interpolate(MeshPtr m, const ScalarField& u);
  static DiscreteField constant(MeshPtr m, double c);
  /// Wraps the field as a ScalarField tagged P1-discrete.
  ScalarField as_field() const;
};

}  // namespace nlcvp
