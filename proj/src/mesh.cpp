#include "nlcvp/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "nlcvp/errors.hpp"

namespace nlcvp {

std::vector<int> Mesh1D::indices(NodeTag t) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == t) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> Mesh1D::closure_indices() const {
  std::vector<int> out;
  for (int i = ia(); i <= ib(); ++i) out.push_back(i);
  return out;
}

bool Mesh1D::same_as(const Mesh1D& o) const noexcept {
  return a == o.a && b == o.b && n == o.n && collar_n == o.collar_n;
}

MeshPtr build_mesh(double a, double b, int n_interior, double collar_R) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorKind::domain, "build_mesh: degenerate interval (need a < b)");
  }
  if (n_interior < 4) throw Error(ErrorKind::domain, "build_mesh: need at least 4 elements in the domain");
  if (!(collar_R > 0.0)) throw Error(ErrorKind::domain, "build_mesh: collar width must be positive");
  auto m = std::make_shared<Mesh1D>();
  m->a = a;
  m->b = b;
  m->n = n_interior;
  m->h = (b - a) / n_interior;
  // snap outward; the tolerance keeps exact multiples from gaining an element
  m->collar_n = static_cast<int>(std::ceil(collar_R / m->h - 1e-9));
  if (m->collar_n < 1) m->collar_n = 1;
  m->collar_R = m->collar_n * m->h;
  const int N = 2 * m->collar_n + n_interior + 1;
  m->nodes.resize(N);
  m->tags.resize(N);
  for (int i = 0; i < N; ++i) {
    const int j = i - m->collar_n;  // offset from a in elements
    if (j == 0) {
      m->nodes[i] = a;
    } else if (j == n_interior) {
      m->nodes[i] = b;
    } else if (j > 0 && j < n_interior) {
      m->nodes[i] = a + (b - a) * (static_cast<double>(j) / n_interior);
    } else {
      m->nodes[i] = a + j * m->h;
      if (j > n_interior) m->nodes[i] = b + (j - n_interior) * m->h;
    }
    if (j == 0 || j == n_interior) {
      m->tags[i] = NodeTag::boundary;
    } else if (j > 0 && j < n_interior) {
      m->tags[i] = NodeTag::interior;
    } else {
      m->tags[i] = NodeTag::complement;
    }
  }
  return m;
}

DiscreteField::DiscreteField(MeshPtr m, Eigen::VectorXd c) : mesh(std::move(m)), coeffs(std::move(c)) {
  if (!mesh) throw Error(ErrorKind::domain, "DiscreteField: null mesh");
  if (static_cast<std::size_t>(coeffs.size()) != mesh->size()) {
    throw Error(ErrorKind::mesh_mismatch, "DiscreteField: coefficient count does not match the mesh");
  }
}

double DiscreteField::operator()(double x) const {
  const Mesh1D& m = *mesh;
  if (x < m.T_lo() || x > m.T_hi()) return 0.0;
  double s = (x - m.T_lo()) / m.h;
  int e = static_cast<int>(std::floor(s));
  e = std::clamp(e, 0, m.elements() - 1);
  const double x0 = m.nodes[e];
  const double x1 = m.nodes[e + 1];
  const double t = (x - x0) / (x1 - x0);
  return (1.0 - t) * coeffs[e] + t * coeffs[e + 1];
}

DiscreteField DiscreteField::interpolate(MeshPtr m, const ScalarField& u) {
  Eigen::VectorXd c(m->size());
  for (std::size_t i = 0; i < m->size(); ++i) c[i] = u(m->nodes[i]);
  return DiscreteField(std::move(m), std::move(c));
}

DiscreteField DiscreteField::constant(MeshPtr m, double c) {
  const auto n = static_cast<Eigen::Index>(m->size());
  return DiscreteField(std::move(m), Eigen::VectorXd::Constant(n, c));
}

ScalarField DiscreteField::as_field() const {
  DiscreteField copy = *this;
  ScalarField f([copy](double x) { return copy(x); }, Regularity::p1_discrete,
                Support::interval(mesh->T_lo(), mesh->T_hi()));
  f.with_breakpoints(mesh->nodes).with_name("p1");
  return f;
}

}  // namespace nlcvp
