#include "nlcvp/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "nlcvp/errors.hpp"
#include "nlcvp/quadrature.hpp"
#include "nlcvp/simd/linalg.hpp"

namespace nlcvp {

const char* to_string(TailMode t) noexcept {
  switch (t) {
    case TailMode::drop: return "drop";
    case TailMode::dirichlet_zero: return "dirichlet_zero";
    case TailMode::dirichlet_const: return "dirichlet_const";
    case TailMode::free_const: return "free_const";
  }
  return "unknown";
}

namespace {

using Mat4 = Eigen::Matrix4d;

// 2-point Gauss on [0, 1]; exact for the quadratic x-integrands below
constexpr double kG2x[2] = {0.21132486540518711775, 0.78867513459481288225};

// Adds weight * integral over the x-range of w w^T, where for offset k the
// difference vector is w = [phi0(x), phi1(x), -psi0(x+z), -psi1(x+z)].
void accumulate_offset(int k, double h, double z, double weight, Mat4& acc) {
  const double kh = k * h;
  double x0, x1;
  if (z <= kh) {
    x0 = kh - z;
    x1 = h;
  } else {
    x0 = 0.0;
    x1 = (k + 1) * h - z;
  }
  const double len = x1 - x0;
  if (!(len > 0.0)) return;
  for (double t : kG2x) {
    const double x = x0 + t * len;
    const double y = x + z;
    Eigen::Vector4d w(1.0 - x / h, x / h, -((k + 1) - y / h), -(y / h - k));
    acc.noalias() += (0.5 * len * weight) * (w * w.transpose());
  }
}

// integral over z in [lo, hi] of nu(z) * (x-integral), Gauss in z on each
// smooth piece of the kernel
void integrate_offset(const KernelSpec& kern, int k, double h, double lo, double hi, int order, Mat4& acc) {
  std::vector<double> cuts{lo};
  for (double b : kern.breakpoints()) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  cuts.push_back(std::min(hi, std::max(lo, kern.support_radius())));
  const quad::Rule& r = quad::gauss_legendre(order);
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double a = cuts[p];
    const double b = cuts[p + 1];
    if (!(b > a)) continue;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const double z = mid + half * r.nodes[i];
      const double nu = kern.density(z);
      if (nu != 0.0) accumulate_offset(k, h, z, half * r.weights[i] * nu, acc);
    }
  }
}

// diagonal := -(off-diagonal row sum), so each local matrix annihilates constants exactly
void zero_row_sums(Eigen::MatrixXd& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j != i) s += A(i, j);
    }
    A(i, i) = -s;
  }
}

void check_form_finite(const KernelSpec& kern) {
  if (kern.singular_exponent() >= 2.0) {
    throw Error(ErrorKind::non_integrable,
                "the energy form is infinite on P1 functions for kernels with singular exponent >= 2");
  }
  if (kern.p_order() != 2.0) {
    throw Error(ErrorKind::domain, "Galerkin assembly supports p = 2 kernels only");
  }
}

template <class Add>
void scatter_pairs(const Mesh1D& m, const PairTable& tab, int e_begin, int e_end, Add&& add) {
  const int NT = m.elements();
  const int kmax = static_cast<int>(tab.A.size()) - 1;
  for (int e = e_begin; e < e_end; ++e) {
    const bool e_in = m.element_in_omega(e);
    for (int ep = e; ep < NT; ++ep) {
      const int k = ep - e;
      if (k > kmax) break;
      const bool ep_in = m.element_in_omega(ep);
      if (!e_in && !ep_in) {
        // both in the complement: skip ahead to Omega if it lies to the right
        if (ep < m.ia()) {
          ep = m.ia() - 1;
          continue;
        }
        break;
      }
      add(e, ep, k, e_in, ep_in);
    }
  }
}

}  // namespace

PairTable pair_table(const KernelSpec& kern, double h, int max_offset, int quad_order) {
  check_form_finite(kern);
  if (quad_order < 4) throw Error(ErrorKind::domain, "quad_order must be at least 4");
  PairTable t;
  t.h = h;
  // offsets beyond the kernel support contribute nothing
  const double R = kern.support_radius();
  int kmax = max_offset;
  if (std::isfinite(R)) kmax = std::min(kmax, static_cast<int>(std::ceil(R / h)) + 1);
  t.A.resize(kmax + 1);

  // offset 0: (x - y)^2 / h^2 over the element square
  {
    const double c0 = (2.0 / (h * h)) * (h * kern.moment(2.0, 0.0, h) - kern.moment(3.0, 0.0, h));
    Eigen::MatrixXd A(2, 2);
    A << c0, -c0, -c0, c0;
    t.A[0] = A;
  }
  if (kmax >= 1) {
    // z in [0, h]: every product of differences is a cubic multiple of z
    const double m3 = kern.moment(3.0, 0.0, h) / (h * h);
    Eigen::MatrixXd A(3, 3);
    A << 1.0 / 3, -1.0 / 6, -1.0 / 6, -1.0 / 6, 1.0 / 3, -1.0 / 6, -1.0 / 6, -1.0 / 6, 1.0 / 3;
    A *= m3;
    Mat4 acc = Mat4::Zero();
    integrate_offset(kern, 1, h, h, 2.0 * h, quad_order, acc);
    // fold the shared node (local slots 1 and 2)
    const int map[4] = {0, 1, 1, 2};
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) A(map[i], map[j]) += acc(i, j);
    }
    zero_row_sums(A);
    t.A[1] = A;
  }
  for (int k = 2; k <= kmax; ++k) {
    Mat4 acc = Mat4::Zero();
    // the x-range changes shape at z = kh
    integrate_offset(kern, k, h, (k - 1) * h, k * h, quad_order, acc);
    integrate_offset(kern, k, h, k * h, (k + 1) * h, quad_order, acc);
    Eigen::MatrixXd A = acc;
    zero_row_sums(A);
    t.A[k] = A;
  }
  return t;
}

GalerkinForms assemble_forms(MeshPtr mesh, const KernelSpec& kernel, int quad_order, TailMode tail_mode,
                             int threads) {
  if (!mesh) throw Error(ErrorKind::domain, "assemble_forms: null mesh");
  const Mesh1D& m = *mesh;
  const int N = static_cast<int>(m.size());
  const int NT = m.elements();
  GalerkinForms F;
  F.mesh = mesh;
  F.kernel = kernel;
  F.quad_order = quad_order;
  F.tail_mode = tail_mode;
  const PairTable tab = pair_table(kernel, m.h, NT - 1, quad_order);

  auto run = [&](int e_begin, int e_end, Eigen::MatrixXd& E) {
    scatter_pairs(m, tab, e_begin, e_end, [&](int e, int ep, int k, bool e_in, bool) {
      const Eigen::MatrixXd& A = tab.A[k];
      if (k == 0) {
        if (!e_in) return;
        E.block(e, e, 2, 2) += 0.5 * A;
      } else if (k == 1) {
        E.block(e, e, 3, 3) += A;
      } else {
        const int idx[4] = {e, e + 1, ep, ep + 1};
        for (int i = 0; i < 4; ++i) {
          for (int j = 0; j < 4; ++j) E(idx[i], idx[j]) += A(i, j);
        }
      }
    });
  };

  F.E = Eigen::MatrixXd::Zero(N, N);
  threads = std::max(1, std::min(threads, NT));
  if (threads == 1) {
    run(0, NT, F.E);
  } else {
    // element rows split evenly; private buffers merged in order
    std::vector<Eigen::MatrixXd> bufs(threads, Eigen::MatrixXd::Zero(N, N));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      const int lo = static_cast<int>(static_cast<long long>(NT) * t / threads);
      const int hi = static_cast<int>(static_cast<long long>(NT) * (t + 1) / threads);
      pool.emplace_back([&, lo, hi, t] { run(lo, hi, bufs[t]); });
    }
    for (auto& th : pool) th.join();
    for (auto& b : bufs) F.E += b;
  }
  // exact symmetry
  F.E = 0.5 * (F.E + F.E.transpose()).eval();

  F.M = Eigen::MatrixXd::Zero(N, N);
  F.omega_mass = Eigen::VectorXd::Zero(N);
  for (int e = m.ia(); e < m.ib(); ++e) {
    F.M(e, e) += m.h / 3.0;
    F.M(e + 1, e + 1) += m.h / 3.0;
    F.M(e, e + 1) += m.h / 6.0;
    F.M(e + 1, e) += m.h / 6.0;
    F.omega_mass[e] += 0.5 * m.h;
    F.omega_mass[e + 1] += 0.5 * m.h;
  }

  F.E_tail = Eigen::MatrixXd::Zero(N, N);
  F.tail_load = Eigen::VectorXd::Zero(N);
  if (tail_mode != TailMode::drop) {
    const double Tlo = m.T_lo();
    const double Thi = m.T_hi();
    const quad::Rule& r = quad::gauss_legendre(std::max(quad_order, 6));
    Eigen::VectorXd bl = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd br = Eigen::VectorXd::Zero(N);
    for (int e = m.ia(); e < m.ib(); ++e) {
      const double x0 = m.nodes[e];
      for (std::size_t q = 0; q < r.nodes.size(); ++q) {
        const double t = 0.5 * (1.0 + r.nodes[q]);
        const double x = x0 + t * m.h;
        const double tl = kernel.radial_tail(x - Tlo);
        const double tr = kernel.radial_tail(Thi - x);
        const double w = 0.5 * m.h * r.weights[q] * (tl + tr);
        const double p0 = 1.0 - t;
        const double p1 = t;
        F.E_tail(e, e) += w * p0 * p0;
        F.E_tail(e + 1, e + 1) += w * p1 * p1;
        F.E_tail(e, e + 1) += w * p0 * p1;
        F.E_tail(e + 1, e) += w * p0 * p1;
        F.tail_load[e] += w * p0;
        F.tail_load[e + 1] += w * p1;
        const double wq = 0.5 * m.h * r.weights[q];
        bl[e] += wq * tl * p0;
        bl[e + 1] += wq * tl * p1;
        br[e] += wq * tr * p0;
        br[e + 1] += wq * tr * p1;
      }
    }
    if (tail_mode == TailMode::free_const) {
      // minimizing over the constant c on each side of sum_i (u_i - c)^2 tail terms
      const double al = bl.sum();
      const double ar = br.sum();
      if (al > 0.0) F.E_tail.noalias() -= bl * bl.transpose() / al;
      if (ar > 0.0) F.E_tail.noalias() -= br * br.transpose() / ar;
      F.E_tail = 0.5 * (F.E_tail + F.E_tail.transpose()).eval();
    }
    F.E += F.E_tail;
  }

  F.active.assign(N, false);
  for (int i = 0; i < N; ++i) {
    F.active[i] = F.E(i, i) > 0.0 || (i >= m.ia() && i <= m.ib());
  }
  return F;
}

Eigen::MatrixXd assemble_v_form(MeshPtr mesh, const KernelSpec& kernel, int quad_order) {
  const Mesh1D& m = *mesh;
  const int N = static_cast<int>(m.size());
  const PairTable tab = pair_table(kernel, m.h, m.elements() - 1, quad_order);
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(N, N);
  scatter_pairs(m, tab, 0, m.elements(), [&](int e, int ep, int k, bool e_in, bool ep_in) {
    const Eigen::MatrixXd& A = tab.A[k];
    if (k == 0) {
      if (e_in) V.block(e, e, 2, 2) += A;
      return;
    }
    // ordered pairs with the first element in Omega: both orders when both are inside
    const double c = (e_in && ep_in) ? 2.0 : 1.0;
    if (k == 1) {
      V.block(e, e, 3, 3) += c * A;
    } else {
      const int idx[4] = {e, e + 1, ep, ep + 1};
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) V(idx[i], idx[j]) += c * A(i, j);
      }
    }
  });
  return 0.5 * (V + V.transpose());
}

Eigen::MatrixXd assemble_complement_mass(const Mesh1D& m, const std::function<double(double)>& weight,
                                         int quad_order) {
  const int N = static_cast<int>(m.size());
  Eigen::MatrixXd Mc = Eigen::MatrixXd::Zero(N, N);
  const quad::Rule& r = quad::gauss_legendre(quad_order);
  for (int e = 0; e < m.elements(); ++e) {
    if (m.element_in_omega(e)) continue;
    const double x0 = m.nodes[e];
    for (std::size_t q = 0; q < r.nodes.size(); ++q) {
      const double t = 0.5 * (1.0 + r.nodes[q]);
      const double w = 0.5 * m.h * r.weights[q] * weight(x0 + t * m.h);
      const double p0 = 1.0 - t;
      const double p1 = t;
      Mc(e, e) += w * p0 * p0;
      Mc(e + 1, e + 1) += w * p1 * p1;
      Mc(e, e + 1) += w * p0 * p1;
      Mc(e + 1, e) += w * p0 * p1;
    }
  }
  return Mc;
}

Eigen::VectorXd assemble_load(const Mesh1D& m, const ScalarField& f, const ScalarField& g,
                              const std::optional<WeightSpec>& g_weight, int quad_order) {
  const int N = static_cast<int>(m.size());
  Eigen::VectorXd r = Eigen::VectorXd::Zero(N);
  const quad::Rule& rule = quad::gauss_legendre(quad_order);
  for (int e = 0; e < m.elements(); ++e) {
    const bool inside = m.element_in_omega(e);
    const ScalarField& src = inside ? f : g;
    if (!src) continue;
    if (!inside && src.is_constant() && src(0.0) == 0.0) continue;
    const double x0 = m.nodes[e];
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = 0.5 * (1.0 + rule.nodes[q]);
      const double x = x0 + t * m.h;
      double v = src(x);
      if (!inside && g_weight) v *= weight_eval(*g_weight, x);
      const double w = 0.5 * m.h * rule.weights[q] * v;
      r[e] += w * (1.0 - t);
      r[e + 1] += w * t;
    }
  }
  return r;
}

double seminorm_E(const GalerkinForms& forms, const DiscreteField& u) {
  if (!u.mesh || !forms.mesh || !u.mesh->same_as(*forms.mesh)) {
    throw Error(ErrorKind::mesh_mismatch, "seminorm_E: field and forms live on different meshes");
  }
  const auto n = static_cast<std::size_t>(forms.E.rows());
  return simd::active().quad_form(forms.E.data(), n, n, u.coeffs.data(), u.coeffs.data());
}

double l2_omega(const GalerkinForms& forms, const Eigen::VectorXd& u) {
  const auto n = static_cast<std::size_t>(forms.M.rows());
  return std::sqrt(std::max(0.0, simd::active().quad_form(forms.M.data(), n, n, u.data(), u.data())));
}

void write_matrix_market(std::ostream& os, const Eigen::MatrixXd& A, bool symmetric, double drop_below,
                         const std::string& comment) {
  std::size_t nnz = 0;
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    for (Eigen::Index i = symmetric ? j : 0; i < A.rows(); ++i) {
      if (std::abs(A(i, j)) > drop_below) ++nnz;
    }
  }
  os << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << "\n";
  if (!comment.empty()) os << "% " << comment << "\n";
  os << A.rows() << " " << A.cols() << " " << nnz << "\n";
  char buf[64];
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    for (Eigen::Index i = symmetric ? j : 0; i < A.rows(); ++i) {
      if (std::abs(A(i, j)) > drop_below) {
        std::snprintf(buf, sizeof buf, "%.17g", A(i, j));
        os << (i + 1) << " " << (j + 1) << " " << buf << "\n";
      }
    }
  }
}

}  // namespace nlcvp
