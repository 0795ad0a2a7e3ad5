#include "nlcvp/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "nlcvp/assembly.hpp"
#include "nlcvp/constants.hpp"
#include "nlcvp/convergence.hpp"
#include "nlcvp/errors.hpp"
#include "nlcvp/io.hpp"
#include "nlcvp/operator.hpp"
#include "nlcvp/simd/linalg.hpp"
#include "nlcvp/solvers.hpp"
#include "nlcvp/spectral.hpp"

namespace nlcvp::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void config_fail(const std::string& msg) { throw Error(ErrorKind::config, msg); }

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) config_fail(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) config_fail(where + ": unknown key '" + it.key() + "'");
  }
}

double num(const json& j, const char* key, double def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number()) config_fail(std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

int integer(const json& j, const char* key, int def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number_integer()) config_fail(std::string("'") + key + "' must be an integer");
  return j[key].get<int>();
}

std::string str(const json& j, const char* key, const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_string()) config_fail(std::string("'") + key + "' must be a string");
  return j[key].get<std::string>();
}

std::vector<double> num_list(const json& j, const char* key, const std::vector<double>& def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_array()) config_fail(std::string("'") + key + "' must be an array of numbers");
  std::vector<double> v;
  for (const auto& x : j[key]) {
    if (!x.is_number()) config_fail(std::string("'") + key + "' must be an array of numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

const json& block(const json& cfg, const char* key) {
  static const json empty = json::object();
  return cfg.contains(key) ? cfg[key] : empty;
}

struct Context {
  json cfg;
  std::string command;
  std::string sub;
  fs::path out_dir;
  fs::path base_dir;
  int threads = 1;
  std::vector<std::pair<fs::path, std::string>> artifacts;
  std::ostream* out = nullptr;
};

// ---- configuration blocks -------------------------------------------------

Normalization parse_normalization(const std::string& s) {
  if (s == "exact_C") return Normalization::exact_C;
  if (s == "half_C") return Normalization::half_C;
  if (s == "stable_a") return Normalization::stable_a;
  if (s == "unnormalized") return Normalization::unnormalized;
  config_fail("unknown normalization '" + s + "'");
}

KernelFamily parse_family(const std::string& s) {
  if (s == "fractional") return KernelFamily::fractional;
  if (s == "window") return KernelFamily::window;
  if (s == "log_window") return KernelFamily::log_window;
  if (s == "rescaled") return KernelFamily::rescaled;
  config_fail("unknown kernel family '" + s + "'");
}

KernelParams parse_kernel_params(const json& j, const std::string& where) {
  check_keys(j, {"family", "d", "p", "alpha", "normalization", "beta", "eps", "eps0", "scale", "base"}, where);
  KernelParams k;
  k.family = parse_family(str(j, "family", "fractional"));
  k.d = integer(j, "d", 1);
  k.p = num(j, "p", 2.0);
  k.alpha = num(j, "alpha", 1.0);
  k.normalization = parse_normalization(str(j, "normalization", "exact_C"));
  k.beta = num(j, "beta", 0.0);
  k.eps = num(j, "eps", 0.1);
  k.eps0 = num(j, "eps0", 0.5);
  k.scale = num(j, "scale", 1.0);
  if (j.contains("base")) k.base = std::make_shared<KernelParams>(parse_kernel_params(j["base"], where + ".base"));
  return k;
}

KernelSpec kernel_of(const Context& c) { return make_kernel(parse_kernel_params(block(c.cfg, "kernel"), "kernel")); }

struct DomainCfg {
  double a = 0.0;
  double b = 1.0;
  int n = 64;
  double collar_R = 0.0;
  TailMode tail = TailMode::drop;
  int quad_order = 10;
};

DomainCfg domain_of(const Context& c) {
  const json& j = block(c.cfg, "domain");
  check_keys(j, {"a", "b", "n", "collar_R", "tail_mode", "quad_order"}, "domain");
  DomainCfg d;
  d.a = num(j, "a", 0.0);
  d.b = num(j, "b", 1.0);
  d.n = integer(j, "n", 64);
  d.collar_R = num(j, "collar_R", 2.0 * (d.b - d.a));
  d.quad_order = integer(j, "quad_order", 10);
  const std::string t = str(j, "tail_mode", "drop");
  if (t == "drop") {
    d.tail = TailMode::drop;
  } else if (t == "dirichlet_zero") {
    d.tail = TailMode::dirichlet_zero;
  } else if (t == "dirichlet_const") {
    d.tail = TailMode::dirichlet_const;
  } else if (t == "free_const") {
    d.tail = TailMode::free_const;
  } else {
    config_fail("unknown tail_mode '" + t + "'");
  }
  if (!(d.b > d.a)) config_fail("domain: need a < b");
  if (d.n < 4) config_fail("domain: n must be at least 4");
  return d;
}

std::shared_ptr<const GalerkinForms> forms_of(const Context& c) {
  const DomainCfg d = domain_of(c);
  const KernelSpec k = kernel_of(c);
  MeshPtr m = build_mesh(d.a, d.b, d.n, d.collar_R);
  return std::make_shared<const GalerkinForms>(assemble_forms(m, k, d.quad_order, d.tail, c.threads));
}

ScalarField parse_field(const Context& c, const json& j, const std::string& where) {
  if (j.is_number()) return catalog::constant(j.get<double>());
  if (!j.is_object()) config_fail(where + ": expected a number or a function object");
  if (j.contains("file")) {
    check_keys(j, {"file"}, where);
    if (!j["file"].is_string()) config_fail(where + ".file must be a string");
    fs::path p = j["file"].get<std::string>();
    if (p.is_relative()) p = c.base_dir / p;
    return io::tabulated_field(io::read_table(p));
  }
  const std::string name = str(j, "name", "");
  if (name == "constant") {
    check_keys(j, {"name", "c"}, where);
    return catalog::constant(num(j, "c", 0.0));
  }
  if (name == "monomial") {
    check_keys(j, {"name", "k", "c"}, where);
    return catalog::monomial(integer(j, "k", 1), num(j, "c", 1.0));
  }
  if (name == "sine" || name == "cosine") {
    check_keys(j, {"name", "freq", "phase"}, where);
    const double f = num(j, "freq", 1.0);
    const double ph = num(j, "phase", 0.0);
    return name == "sine" ? catalog::sine(f, ph) : catalog::cosine(f, ph);
  }
  if (name == "gaussian") {
    check_keys(j, {"name", "center", "width"}, where);
    return catalog::gaussian(num(j, "center", 0.0), num(j, "width", 1.0));
  }
  if (name == "bump") {
    check_keys(j, {"name", "center", "radius"}, where);
    return catalog::bump(num(j, "center", 0.0), num(j, "radius", 1.0));
  }
  if (name == "getoor") {
    check_keys(j, {"name", "s", "center", "radius"}, where);
    return catalog::getoor(num(j, "s", 0.5), num(j, "center", 0.0), num(j, "radius", 1.0));
  }
  config_fail(where + ": unknown function '" + name + "'");
}

ScalarField optional_field(const Context& c, const json& j, const char* key) {
  if (!j.contains(key)) return ScalarField();
  return parse_field(c, j[key], key);
}

std::optional<WeightSpec> parse_weight(const Context& c, const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  const json& w = j[key];
  check_keys(w, {"K", "kind"}, key);
  const std::vector<double> K = num_list(w, "K", {});
  if (K.size() != 2 || !(K[1] > K[0])) config_fail(std::string(key) + ".K must be [lo, hi] with lo < hi");
  const std::string kind = str(w, "kind", "essinf");
  WeightKind wk;
  if (kind == "essinf") {
    wk = WeightKind::essinf;
  } else if (kind == "integral") {
    wk = WeightKind::integral;
  } else {
    config_fail(std::string(key) + ".kind must be essinf or integral");
  }
  return WeightSpec{kernel_of(c), {K[0], K[1]}, wk};
}

Condition parse_condition(const std::string& s) {
  if (s == "neumann") return Condition::neumann;
  if (s == "dirichlet") return Condition::dirichlet;
  if (s == "robin") return Condition::robin;
  config_fail("unknown condition '" + s + "'");
}

// ---- reports ---------------------------------------------------------------

ojson base_report(const Context& c) {
  ojson r;
  r["command"] = c.sub.empty() ? c.command : c.command + " " + c.sub;
  r["status"] = "ok";
  r["versions"] = {{"nlcvp", NLCVP_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"simd", simd::to_string(simd::active_isa())}};
  r["config"] = c.cfg;
  return r;
}

void emit(Context& c, const std::string& name, const std::string& content) {
  c.artifacts.emplace_back(c.out_dir / name, content);
}

void emit_json(Context& c, const std::string& name, const ojson& j) { emit(c, name, j.dump(2) + "\n"); }

std::vector<double> finite_or_null(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// ---- commands --------------------------------------------------------------

int cmd_constants(Context& c, ojson& rep) {
  const json& k = block(c.cfg, "kernel");
  check_keys(k, {"d", "alpha", "p", "family", "normalization"}, "kernel");
  const int d = integer(k, "d", 1);
  const double alpha = num(k, "alpha", 1.0);
  const double p = num(k, "p", 2.0);
  ojson res;
  res["d"] = d;
  res["alpha"] = alpha;
  res["p"] = p;
  res["C_d_alpha"] = constants::frac_norming_constant(d, alpha);
  if (d == 1) {
    const auto cr = constants::norming_constant_report(1, alpha);
    res["C_d_alpha_quadrature"] = *cr.quadrature_value;
    res["C_d_alpha_gap"] = *cr.abs_gap;
    res["C_d_alpha_relative_gap"] = *cr.abs_gap / cr.value;
  }
  res["sphere_area"] = constants::sphere_area(d);
  res["bbm_constant"] = constants::bbm_constant(d, p);
  res["bbm_limit_factor"] = constants::sphere_area(d) / p * constants::bbm_constant(d, p);
  if (alpha < p) res["stable_normalization"] = constants::stable_normalization(d, alpha, p);
  rep["results"] = res;
  rep["provenance"] = {{"C_d_alpha", "Gamma-function closed form"},
                       {"C_d_alpha_quadrature", "reciprocal of an independent quadrature of (1 - cos t)|t|^{-1-alpha}"}};
  emit_json(c, "constants.json", rep);
  *c.out << res.dump(2) << "\n";
  return ok;
}

int cmd_apply(Context& c, ojson& rep) {
  const json& j = block(c.cfg, "apply");
  check_keys(j, {"operator", "u", "x", "grid", "rel_tol"}, "apply");
  const KernelSpec k = kernel_of(c);
  const DomainCfg d = domain_of(c);
  if (!j.contains("u")) config_fail("apply: missing 'u'");
  const ScalarField u = parse_field(c, j["u"], "apply.u");
  const std::string op = str(j, "operator", "L");
  if (op != "L" && op != "N") config_fail("apply.operator must be L or N");
  std::vector<double> xs = num_list(j, "x", {});
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, {"lo", "hi", "count"}, "apply.grid");
    const double lo = num(g, "lo", d.a);
    const double hi = num(g, "hi", d.b);
    const int cnt = integer(g, "count", 11);
    if (cnt < 1) config_fail("apply.grid.count must be positive");
    for (int i = 0; i < cnt; ++i) xs.push_back(cnt == 1 ? lo : lo + (hi - lo) * i / (cnt - 1));
  }
  if (xs.empty()) config_fail("apply: give 'x' or 'grid'");
  const double tol = num(j, "rel_tol", 1e-10);
  io::CsvWriter csv({"x", "value"});
  for (double x : xs) {
    const double v = op == "L" ? apply_L(k, u, x, tol) : apply_N(k, {d.a, d.b}, u, x, tol);
    csv.row({x, v});
  }
  rep["results"] = {{"points", xs.size()}, {"operator", op}};
  emit(c, "apply.csv", csv.str());
  emit_json(c, "apply.json", rep);
  return ok;
}

ComplementProblem problem_of(const Context& c, std::shared_ptr<const GalerkinForms> F) {
  const json& j = block(c.cfg, "problem");
  check_keys(j, {"kind", "f", "g", "g_flux", "g_weight", "beta", "nu_K", "lambda", "space", "dirichlet_set"},
             "problem");
  ComplementProblem p;
  p.forms = F;
  const std::string kind = str(j, "kind", "dirichlet");
  if (kind == "dirichlet") {
    p.kind = ProblemKind::dirichlet;
  } else if (kind == "neumann") {
    p.kind = ProblemKind::neumann;
  } else if (kind == "robin") {
    p.kind = ProblemKind::robin;
  } else if (kind == "mixed") {
    p.kind = ProblemKind::mixed;
  } else if (kind == "helmholtz") {
    p.kind = ProblemKind::helmholtz;
  } else {
    config_fail("unknown problem kind '" + kind + "'");
  }
  p.f = optional_field(c, j, "f");
  p.g = optional_field(c, j, "g");
  p.g_flux = optional_field(c, j, "g_flux");
  p.g_weight = parse_weight(c, j, "g_weight");
  if (j.contains("beta")) p.robin = RobinData{parse_field(c, j["beta"], "beta"), parse_weight(c, j, "nu_K")};
  p.lambda = num(j, "lambda", 0.0);
  p.helmholtz_space = parse_condition(str(j, "space", "neumann"));
  if (p.kind == ProblemKind::mixed) {
    const Mesh1D& m = *F->mesh;
    p.dirichlet_set.assign(m.size(), false);
    if (!j.contains("dirichlet_set")) config_fail("mixed problem needs 'dirichlet_set'");
    const json& ds = j["dirichlet_set"];
    auto mark = [&](double lo, double hi) {
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.tags[i] == NodeTag::complement && m.nodes[i] >= lo && m.nodes[i] <= hi) p.dirichlet_set[i] = true;
      }
    };
    if (ds.is_string()) {
      const std::string s = ds.get<std::string>();
      if (s == "left" || s == "both") mark(-1e300, m.a);
      if (s == "right" || s == "both") mark(m.b, 1e300);
      if (s != "left" && s != "right" && s != "both" && s != "none") {
        config_fail("dirichlet_set must be left, right, both, none or a list of [lo, hi]");
      }
    } else if (ds.is_array()) {
      for (const auto& iv : ds) {
        if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
          config_fail("dirichlet_set intervals must be [lo, hi]");
        }
        mark(iv[0].get<double>(), iv[1].get<double>());
      }
    } else {
      config_fail("dirichlet_set must be a string or a list of intervals");
    }
  }
  const json& tol = block(c.cfg, "tolerances");
  check_keys(tol, {"compatibility"}, "tolerances");
  if (tol.contains("compatibility")) p.compatibility_tol = num(tol, "compatibility", 0.0);
  return p;
}

int cmd_solve(Context& c, ojson& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto F = forms_of(c);
  const auto t1 = std::chrono::steady_clock::now();
  const ComplementProblem p = problem_of(c, F);
  const Solution s = solve(p);
  const auto t2 = std::chrono::steady_clock::now();
  const Mesh1D& m = *F->mesh;
  io::CsvWriter csv({"node", "x", "value"});
  for (std::size_t i = 0; i < m.size(); ++i) csv.row({static_cast<double>(i), m.nodes[i], s.u.coeffs[i]});
  ojson res;
  res["kind"] = to_string(p.kind);
  res["residual"] = s.residual;
  res["unknowns"] = s.unknowns.size();
  res["fixed"] = s.fixed.size();
  res["l2_omega"] = l2_omega(*F, s.u.coeffs);
  res["energy"] = seminorm_E(*F, s.u);
  res["omega_mean"] = F->omega_mass.dot(s.u.coeffs) / (m.b - m.a);
  if (s.compatibility) {
    res["compatibility"] = {{"residual", *s.compatibility}, {"tolerance", *s.compatibility_tol}};
  }
  if (s.resonant) res["fredholm_branch"] = s.note;
  rep["results"] = res;
  rep["timings"] = {{"assembly_s", std::chrono::duration<double>(t1 - t0).count()},
                    {"solve_s", std::chrono::duration<double>(t2 - t1).count()}};
  emit(c, "solution.csv", csv.str());
  emit_json(c, "solve.json", rep);
  return ok;
}

RobinData robin_of(const Context& c, const json& j) {
  if (!j.contains("beta")) config_fail("robin condition needs 'beta'");
  return RobinData{parse_field(c, j["beta"], "beta"), parse_weight(c, j, "nu_K")};
}

int cmd_eigs(Context& c, ojson& rep) {
  const json& j = block(c.cfg, "spectrum");
  check_keys(j, {"condition", "k", "beta", "nu_K"}, "spectrum");
  const auto F = forms_of(c);
  const Condition cond = parse_condition(str(j, "condition", "neumann"));
  std::optional<RobinData> rb;
  if (cond == Condition::robin) rb = robin_of(c, j);
  const int k = integer(j, "k", 8);
  const Spectrum s = eig(*F, cond, k, rb ? &*rb : nullptr);
  const Mesh1D& m = *F->mesh;
  io::CsvWriter vals({"index", "value"});
  for (int i = 0; i < s.size(); ++i) vals.row({static_cast<double>(i), s.values[i]});
  std::vector<std::string> head{"node", "x"};
  for (int i = 0; i < s.size(); ++i) head.push_back("v" + std::to_string(i));
  io::CsvWriter vecs(head);
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<double> row{static_cast<double>(i), m.nodes[i]};
    for (int jj = 0; jj < s.size(); ++jj) row.push_back(s.vectors(i, jj));
    vecs.row(row);
  }
  const Eigen::MatrixXd G = s.vectors.transpose() * F->M * s.vectors;
  ojson res;
  res["condition"] = to_string(cond);
  res["values"] = finite_or_null(s.values);
  res["dimension"] = s.dimension;
  res["rayleigh_residual"] = rayleigh_residual(*F, s);
  res["orthonormality_error"] = (G - Eigen::MatrixXd::Identity(s.size(), s.size())).cwiseAbs().maxCoeff();
  if (cond == Condition::neumann && s.size() > 1) res["poincare_mean_zero"] = 1.0 / s.values[1];
  if (cond == Condition::dirichlet) res["poincare_friedrichs"] = 1.0 / s.values[0];
  rep["results"] = res;
  emit(c, "eigenvalues.csv", vals.str());
  emit(c, "eigenvectors.csv", vecs.str());
  emit_json(c, "eigs.json", rep);
  return ok;
}

int cmd_evolve(Context& c, ojson& rep) {
  const json& j = block(c.cfg, "evolve");
  check_keys(j, {"equation", "condition", "T", "samples", "u0", "u1", "k", "f", "beta", "nu_K"}, "evolve");
  const auto F = forms_of(c);
  const Mesh1D& m = *F->mesh;
  const Condition cond = parse_condition(str(j, "condition", "neumann"));
  std::optional<RobinData> rb;
  if (cond == Condition::robin) rb = robin_of(c, j);
  const Spectrum s = eig(*F, cond, integer(j, "k", 0), rb ? &*rb : nullptr);
  if (!j.contains("u0")) config_fail("evolve: missing 'u0'");
  const MeshPtr mp = F->mesh;
  const Eigen::VectorXd u0 = DiscreteField::interpolate(mp, parse_field(c, j["u0"], "u0")).coeffs;
  const double T = num(j, "T", 1.0);
  const int samples = integer(j, "samples", 11);
  const std::string eq = str(j, "equation", "heat");
  ojson res;
  res["equation"] = eq;
  res["modes"] = s.size();
  std::vector<double> mass;
  std::vector<double> norms;
  if (eq == "heat" || eq == "wave") {
    Trajectory tr;
    if (eq == "heat") {
      std::vector<LoadPiece> loads;
      if (j.contains("f")) {
        loads.push_back({0.0, assemble_load(m, parse_field(c, j["f"], "f"), ScalarField())});
      }
      tr = evolve_heat(*F, s, u0, T, samples, loads);
    } else {
      Eigen::VectorXd u1 = Eigen::VectorXd::Zero(u0.size());
      if (j.contains("u1")) u1 = DiscreteField::interpolate(mp, parse_field(c, j["u1"], "u1")).coeffs;
      tr = evolve_wave(*F, s, u0, u1, T, samples);
      res["energy"] = wave_energy(*F, s, u0, u1, tr.times);
    }
    io::CsvWriter csv({"t", "node", "x", "value"});
    for (std::size_t q = 0; q < tr.times.size(); ++q) {
      for (std::size_t i = 0; i < m.size(); ++i) {
        csv.row({tr.times[q], static_cast<double>(i), m.nodes[i], tr.states[q][i]});
      }
      mass.push_back(F->omega_mass.dot(tr.states[q]));
      norms.push_back(l2_omega(*F, tr.states[q]));
    }
    if (tr.truncated) res["warning"] = tr.warning;
    emit(c, "evolve.csv", csv.str());
  } else if (eq == "schrodinger") {
    const ComplexTrajectory tr = evolve_schrodinger(*F, s, u0, T, samples);
    io::CsvWriter csv({"t", "node", "x", "re", "im"});
    for (std::size_t q = 0; q < tr.times.size(); ++q) {
      for (std::size_t i = 0; i < m.size(); ++i) {
        csv.row({tr.times[q], static_cast<double>(i), m.nodes[i], tr.states[q][i].real(), tr.states[q][i].imag()});
      }
      const Eigen::VectorXd re = tr.states[q].real();
      const Eigen::VectorXd im = tr.states[q].imag();
      mass.push_back(F->omega_mass.dot(re));
      norms.push_back(std::hypot(l2_omega(*F, re), l2_omega(*F, im)));
    }
    if (tr.truncated) res["warning"] = tr.warning;
    emit(c, "evolve.csv", csv.str());
  } else {
    config_fail("evolve.equation must be heat, schrodinger or wave");
  }
  res["omega_mass"] = mass;
  res["l2_norm"] = norms;
  rep["results"] = res;
  emit_json(c, "evolve.json", rep);
  return ok;
}

int cmd_dtn(Context& c, ojson& rep) {
  const json& j = block(c.cfg, "dtn");
  check_keys(j, {"lambda", "link", "weight"}, "dtn");
  const auto F = forms_of(c);
  const double lambda = num(j, "lambda", 0.0);
  const DtNMap D = dtn_matrix(F, lambda);
  const double nrm = D.matrix.norm();
  ojson res;
  res["lambda"] = lambda;
  res["nodes"] = D.nodes.size();
  res["symmetry"] = (D.matrix - D.matrix.transpose()).norm() / nrm;
  res["constant_residual"] = (D.matrix * Eigen::VectorXd::Ones(D.matrix.cols())).norm() / nrm;
  const int link = integer(j, "link", 2);
  if (link > 0) {
    std::function<double(double)> w;
    if (auto ws = parse_weight(c, j, "weight")) {
      w = [spec = *ws](double x) { return weight_eval(spec, x); };
    } else {
      const WeightSpec spec{F->kernel, {F->mesh->a, F->mesh->b}, WeightKind::integral};
      w = [spec](double x) { return weight_eval(spec, x); };
    }
    const DtNRobinLink L = dtn_robin_link(D, w, link);
    res["robin_link"] = {{"betas", finite_or_null(L.betas)},
                         {"residuals", finite_or_null(L.residuals)},
                         {"scale", L.scale}};
  }
  rep["results"] = res;
  std::ostringstream mtx;
  write_matrix_market(mtx, D.matrix, false, 0.0, "discrete Dirichlet-to-Neumann map");
  emit(c, "dtn.mtx", mtx.str());
  emit_json(c, "dtn.json", rep);
  return ok;
}

int cmd_assemble(Context& c, ojson& rep) {
  const auto F = forms_of(c);
  const double nrm = F->E.cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F->E, Eigen::EigenvaluesOnly);
  ojson res;
  res["size"] = F->size();
  res["tail_mode"] = to_string(F->tail_mode);
  res["kernel"] = F->kernel.describe();
  res["symmetry"] = (F->E - F->E.transpose()).cwiseAbs().maxCoeff() / nrm;
  res["min_eigenvalue"] = es.eigenvalues()[0];
  res["max_eigenvalue"] = es.eigenvalues()[es.eigenvalues().size() - 1];
  res["row_sum_max"] = (F->E * Eigen::VectorXd::Ones(F->E.cols())).cwiseAbs().maxCoeff() / nrm;
  rep["results"] = res;
  std::ostringstream e;
  std::ostringstream mm;
  write_matrix_market(e, F->E, true, 0.0, "nonlocal energy form");
  write_matrix_market(mm, F->M, true, 0.0, "L2 mass on the domain");
  emit(c, "E.mtx", e.str());
  emit(c, "M.mtx", mm.str());
  emit_json(c, "forms.json", rep);
  return ok;
}

// ---- sweeps ----------------------------------------------------------------

struct FamilyCfg {
  KernelFamilyFn fn;
  std::string parameter;
  bool fractional = false;
};

FamilyCfg family_of(const json& j) {
  const json f = j.contains("family") ? j["family"] : json{{"family", "fractional"}, {"normalization", "stable_a"}};
  check_keys(f, {"family", "normalization", "beta", "eps0", "base"}, "sweep.family");
  const std::string fam = str(f, "family", "fractional");
  FamilyCfg out;
  if (fam == "fractional") {
    out.fn = fractional_family(parse_normalization(str(f, "normalization", "exact_C")));
    out.parameter = "alpha";
    out.fractional = true;
  } else if (fam == "window") {
    const double beta = num(f, "beta", 0.0);
    out.fn = [beta](double eps) { return KernelSpec::window(beta, eps); };
    out.parameter = "eps";
  } else if (fam == "log_window") {
    const double eps0 = num(f, "eps0", 0.5);
    out.fn = [eps0](double eps) { return KernelSpec::log_window(eps, eps0); };
    out.parameter = "eps";
  } else if (fam == "rescaled") {
    if (!f.contains("base")) config_fail("sweep.family: rescaled needs 'base'");
    const KernelSpec base = make_kernel(parse_kernel_params(f["base"], "sweep.family.base"));
    out.fn = [base](double eps) { return KernelSpec::rescaled(base, eps); };
    out.parameter = "eps";
  } else {
    config_fail("sweep.family: unknown family '" + fam + "'");
  }
  return out;
}

SweepMesh sweep_mesh(const Context& c) {
  const json& j = block(c.cfg, "domain");
  check_keys(j, {"a", "b", "n", "collar_R", "tail_mode", "quad_order"}, "domain");
  SweepMesh m;
  m.a = num(j, "a", 0.0);
  m.b = num(j, "b", 1.0);
  m.n = integer(j, "n", 128);
  m.collar_R = num(j, "collar_R", 0.0);
  m.quad_order = integer(j, "quad_order", 10);
  m.threads = c.threads;
  return m;
}

ojson report_json(const SweepReport& r) {
  ojson j;
  j["experiment"] = r.experiment;
  j["parameter"] = r.parameter_name;
  j["reference_provenance"] = r.reference_provenance;
  j["verdict"] = to_string(r.verdict);
  ojson pts = ojson::array();
  for (const auto& p : r.points) {
    pts.push_back({{"parameter", p.parameter}, {"measured", p.measured}, {"reference", p.reference},
                   {"rel_error", p.rel_error}});
  }
  j["points"] = pts;
  if (r.extrapolated) j["extrapolated"] = *r.extrapolated;
  j["notes"] = r.notes;
  return j;
}

std::string report_csv(const SweepReport& r) {
  io::CsvWriter csv({r.parameter_name, "measured", "reference", "rel_error"});
  for (const auto& p : r.points) csv.row({p.parameter, p.measured, p.reference, p.rel_error});
  return csv.str();
}

int cmd_sweep(Context& c, ojson& rep) {
  const json& j = block(c.cfg, "sweep");
  check_keys(j, {"kind", "grid", "u", "du", "p", "family", "problem", "condition", "k", "mode", "delta"}, "sweep");
  std::string kind = c.sub.empty() ? str(j, "kind", "") : c.sub;
  if (j.contains("kind") && !c.sub.empty() && str(j, "kind", "") != c.sub) {
    config_fail("sweep kind on the command line differs from the config");
  }
  const std::vector<double>& A = default_alpha_grid();
  SweepReport r;
  bool extra_fail = false;
  if (kind == "bbm") {
    const ScalarField u = j.contains("u") ? parse_field(c, j["u"], "u") : catalog::monomial(1);
    // without du, a central difference of u
    const ScalarField du = j.contains("du") ? parse_field(c, j["du"], "du") : ScalarField([u](double x) {
      const double h = 1e-6 * std::max(1.0, std::abs(x));
      return (u(x + h) - u(x - h)) / (2.0 * h);
    });
    const DomainCfg d = domain_of(c);
    r = bbm_sweep({d.a, d.b}, u, du, num(j, "p", 2.0), num_list(j, "grid", {0.9, 0.95, 0.99}));
  } else if (kind == "collapse") {
    const FamilyCfg fam = family_of(j);
    const ScalarField u = j.contains("u") ? parse_field(c, j["u"], "u") : catalog::gaussian();
    const DomainCfg d = domain_of(c);
    r = collapse_check({d.a, d.b}, u, fam.fn, num_list(j, "grid", fam.fractional ? A : std::vector<double>{0.1, 0.05, 0.025}),
                       fam.parameter);
  } else if (kind == "coefficient") {
    const FamilyCfg fam = family_of(j);
    if (!fam.fractional) config_fail("sweep coefficient: fractional families only");
    const std::vector<double> grid = num_list(j, "grid", A);
    const double delta = num(j, "delta", 1.0);
    const double a = limit_coefficient(fam.fn, delta, grid);
    r.experiment = "coefficient";
    r.parameter_name = "alpha";
    r.reference_provenance = "Richardson extrapolation in 2 - alpha of the three grid points closest to 2";
    for (double al : grid) r.points.push_back({al, 2.0 * fam.fn(al).moment(2.0, 0.0, delta), a, 0.0});
    for (auto& p : r.points) p.rel_error = std::abs(p.measured - a) / std::abs(a);
    r.extrapolated = a;
    r.notes.push_back("local coefficient of the half-weighted form: " + io::format_double(a / 2));
    r.verdict = Verdict::converging;
  } else if (kind == "poincare") {
    const FamilyCfg fam = family_of(j);
    if (!fam.fractional) config_fail("sweep poincare: fractional families only");
    r = sharp_constant_sweep(fam.fn, num_list(j, "grid", A), sweep_mesh(c));
    const double ratio = poincare_uniformity_ratio(r);
    rep["uniformity_ratio"] = ratio;
    extra_fail = !(ratio <= 2.0);
  } else if (kind == "solution") {
    const FamilyCfg fam = family_of(j);
    if (!fam.fractional) config_fail("sweep solution: fractional families only");
    const std::string pr = str(j, "problem", "dirichlet_sine");
    SolutionProblem sp;
    if (pr == "dirichlet_sine") {
      sp = SolutionProblem::dirichlet_sine;
    } else if (pr == "neumann_cosine") {
      sp = SolutionProblem::neumann_cosine;
    } else if (pr == "dirichlet_constant") {
      sp = SolutionProblem::dirichlet_constant;
    } else {
      config_fail("sweep.problem must be dirichlet_sine, neumann_cosine or dirichlet_constant");
    }
    r = solution_convergence(sp, fam.fn, num_list(j, "grid", A), sweep_mesh(c));
  } else if (kind == "eigs") {
    const FamilyCfg fam = family_of(j);
    if (!fam.fractional) config_fail("sweep eigs: fractional families only");
    const Condition cond = parse_condition(str(j, "condition", "dirichlet"));
    std::vector<EigenSweepPoint> detail;
    r = eigen_convergence(cond, fam.fn, num_list(j, "grid", A), integer(j, "k", 4), sweep_mesh(c),
                          integer(j, "mode", 1), &detail);
    ojson al = ojson::array();
    for (const auto& pt : detail) al.push_back({{"alpha", pt.alpha}, {"alignment", finite_or_null(pt.alignment)}});
    rep["alignment"] = al;
  } else {
    config_fail("unknown sweep kind '" + kind + "' (bbm, collapse, poincare, solution, eigs, coefficient)");
  }
  rep["results"] = report_json(r);
  emit(c, "sweep_" + kind + ".csv", report_csv(r));
  emit_json(c, "sweep_" + kind + ".json", rep);
  return (r.verdict == Verdict::failed || extra_fail) ? verdict_failure : ok;
}

// ---- driver ----------------------------------------------------------------

void set_path(json& cfg, const char* blk, const char* key, const json& v) {
  if (!cfg.contains(blk)) cfg[blk] = json::object();
  cfg[blk][key] = v;
}

int dispatch(Context& c) {
  ojson rep = base_report(c);
  if (c.command == "constants") return cmd_constants(c, rep);
  if (c.command == "apply") return cmd_apply(c, rep);
  if (c.command == "solve") return cmd_solve(c, rep);
  if (c.command == "eigs") return cmd_eigs(c, rep);
  if (c.command == "evolve") return cmd_evolve(c, rep);
  if (c.command == "dtn") return cmd_dtn(c, rep);
  if (c.command == "assemble") return cmd_assemble(c, rep);
  if (c.command == "sweep") return cmd_sweep(c, rep);
  config_fail("unknown command '" + c.command + "'");
}

void flush(Context& c) {
  for (const auto& [path, content] : c.artifacts) io::write_atomic(path, content);
  for (const auto& a : c.artifacts) *c.out << "wrote " << a.first.string() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlocal complement value problems: assembly, solves, spectra and limit sweeps", "nlcvp"};
  std::string command;
  std::string sub;
  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;
  std::optional<int> d;
  std::optional<int> n;
  std::optional<int> k;
  std::optional<double> alpha, p, eps, eps0, a, b, collar, lambda;
  std::optional<std::string> family, normalization, tail, kind, condition;
  app.add_option("command", command, "constants | apply | solve | eigs | evolve | dtn | assemble | sweep")->required();
  app.add_option("sweep_kind", sub, "for sweep: bbm | collapse | poincare | solution | eigs | coefficient");
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--threads", threads, "assembly threads")->check(CLI::PositiveNumber);
  app.add_option("--d", d, "dimension");
  app.add_option("--alpha", alpha, "kernel order");
  app.add_option("--p", p, "integrability exponent");
  app.add_option("--family", family, "kernel family");
  app.add_option("--normalization", normalization, "fractional normalization");
  app.add_option("--eps", eps, "window radius");
  app.add_option("--eps0", eps0, "outer radius of the log window");
  app.add_option("--a", a, "left end of the domain");
  app.add_option("--b", b, "right end of the domain");
  app.add_option("--n", n, "elements in the domain");
  app.add_option("--collar", collar, "collar width");
  app.add_option("--tail", tail, "drop | free_const | dirichlet_zero | dirichlet_const");
  app.add_option("--kind", kind, "problem kind");
  app.add_option("--k", k, "number of eigenpairs");
  app.add_option("--lambda", lambda, "Helmholtz / DtN parameter");
  app.add_option("--condition", condition, "neumann | dirichlet | robin");

  std::vector<std::string> argv_s{"nlcvp"};
  argv_s.insert(argv_s.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_s) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return config_error;
  }

  Context c;
  c.command = command;
  c.sub = sub;
  c.out_dir = out_dir;
  c.threads = threads;
  c.out = &out;
  c.base_dir = ".";
  try {
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) config_fail("cannot open config " + config_path);
      try {
        c.cfg = json::parse(is);
      } catch (const json::parse_error& e) {
        config_fail(std::string("malformed JSON: ") + e.what());
      }
      c.base_dir = fs::path(config_path).parent_path();
      if (c.base_dir.empty()) c.base_dir = ".";
    } else {
      c.cfg = json::object();
    }
    check_keys(c.cfg, {"command", "kernel", "domain", "problem", "spectrum", "evolve", "dtn", "apply", "sweep",
                       "tolerances", "output"},
               "config");
    if (c.cfg.contains("output")) {
      const json& o = c.cfg["output"];
      check_keys(o, {"dir", "format"}, "output");
      if (str(o, "format", "csv") != "csv") config_fail("output.format: only csv is supported");
      if (o.contains("dir") && app.count("--out") == 0) {
        const fs::path dir = str(o, "dir", ".");
        c.out_dir = dir.is_absolute() ? dir : c.base_dir / dir;
      }
    }
    if (c.cfg.contains("command") && str(c.cfg, "command", "") != command) {
      config_fail("config command '" + str(c.cfg, "command", "") + "' differs from '" + command + "'");
    }
    if (!sub.empty() && command != "sweep") config_fail("unexpected argument '" + sub + "'");
    if (d) set_path(c.cfg, "kernel", "d", *d);
    if (alpha) set_path(c.cfg, "kernel", "alpha", *alpha);
    if (p) set_path(c.cfg, "kernel", "p", *p);
    if (family) set_path(c.cfg, "kernel", "family", *family);
    if (normalization) set_path(c.cfg, "kernel", "normalization", *normalization);
    if (eps) set_path(c.cfg, "kernel", "eps", *eps);
    if (eps0) set_path(c.cfg, "kernel", "eps0", *eps0);
    if (a) set_path(c.cfg, "domain", "a", *a);
    if (b) set_path(c.cfg, "domain", "b", *b);
    if (n) set_path(c.cfg, "domain", "n", *n);
    if (collar) set_path(c.cfg, "domain", "collar_R", *collar);
    if (tail) set_path(c.cfg, "domain", "tail_mode", *tail);
    if (kind) set_path(c.cfg, "problem", "kind", *kind);
    if (lambda) set_path(c.cfg, command == "dtn" ? "dtn" : "problem", "lambda", *lambda);
    if (k) set_path(c.cfg, command == "sweep" ? "sweep" : "spectrum", "k", *k);
    if (condition) set_path(c.cfg, command == "sweep" ? "sweep" : "spectrum", "condition", *condition);
    const int code = dispatch(c);
    flush(c);
    return code;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) {
      err << "config error: " << e.what() << "\n";
      return config_error;
    }
    err << "numerical failure (" << to_string(e.kind()) << "): " << e.what() << "\n";
    ojson rep = base_report(c);
    rep["status"] = "error";
    rep["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    if (auto* inc = dynamic_cast<const IncompatibleDataError*>(&e)) {
      rep["error"]["violated"] = "compatibility condition: integral of f over the domain plus integral of g over the "
                                 "complement equals zero";
      rep["error"]["residual"] = inc->residual();
      rep["error"]["tolerance"] = inc->tolerance();
    }
    if (auto* res = dynamic_cast<const ResonanceError*>(&e)) {
      rep["error"]["eigen_index"] = res->eigen_index();
      rep["error"]["eigenvalue"] = res->eigenvalue();
      rep["error"]["projection_norm"] = res->projection_norm();
    }
    c.artifacts.clear();
    try {
      emit_json(c, command + ".json", rep);
      flush(c);
    } catch (const std::exception& w) {
      err << "could not write the error report: " << w.what() << "\n";
    }
    return numerical_failure;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return numerical_failure;
  }
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace nlcvp::cli
