#include "pqspectra/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pqspectra/error.hpp"

namespace pqs {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

kernels::NodalTerm boundary_term(const MeshDomain& m, const ExponentField& e, const WeightField& beta) {
  kernels::NodalTerm t;
  for (const auto& qp : m.boundary_quadrature()) {
    const auto i = static_cast<std::size_t>(qp.node);
    t.nodes.push_back(qp.node);
    t.exponent.push_back(e[i]);
    t.coefficient.push_back(qp.weight * beta[i]);
  }
  return t;
}

void require_same(const MeshPtr& a, const MeshPtr& b, const char* what) {
  if (!a || !b || !a->same_as(*b)) throw MeshMismatch(std::string(what) + ": operands live on different meshes");
}

double grad_power_integral(const MeshDomain& m, const std::vector<std::array<double, 2>>& g,
                           std::span<const double> exponent_cells) {
  double s = 0.0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const double mag = std::hypot(g[c][0], g[c][1]);
    if (mag > 0.0) s += m.cell_basis()[c].area * std::pow(mag, exponent_cells[c]);
  }
  return s;
}

}  // namespace

EnergyFunctional::EnergyFunctional(const ProblemConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const MeshDomain& m = *cfg_.mesh;
  op_.mesh = forcing_.mesh = cfg_.mesh;
  op_.epsilon = forcing_.epsilon = cfg_.epsilon_reg;
  const auto pc = cfg_.p.cell_values(), qc = cfg_.q.cell_values();
  op_.gradient_terms.push_back({{pc.begin(), pc.end()}, 1.0, {}});
  op_.gradient_terms.push_back({{qc.begin(), qc.end()}, 1.0, {}});
  if (cfg_.robin()) {
    op_.nodal_terms.push_back(boundary_term(m, cfg_.p, cfg_.beta1));
    op_.nodal_terms.push_back(boundary_term(m, cfg_.q, cfg_.beta2));
  }
  kernels::prepare(op_);
  if (cfg_.lambda != 0.0) {
    kernels::NodalTerm t;
    const auto w = m.node_weights();
    for (std::size_t i = 0; i < m.num_nodes(); ++i) {
      t.nodes.push_back(static_cast<int>(i));
      t.exponent.push_back(cfg_.r[i]);
      t.coefficient.push_back(-cfg_.lambda * cfg_.alpha[i] * w[i]);
    }
    forcing_.nodal_terms.push_back(std::move(t));
  }
}

double EnergyFunctional::value(std::span<const double> u) const {
  return kernels::value(op_, u) + kernels::value(forcing_, u);
}

EnergyEval EnergyFunctional::evaluate(std::span<const double> u, std::span<double> grad) const {
  std::vector<double> gf(u.size());
  EnergyEval out;
  const double eo = kernels::value_and_gradient(op_, u, grad);
  const double ef = kernels::value_and_gradient(forcing_, u, gf);
  const double no = norm2(grad), nf = norm2(gf);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += gf[i];
  out.energy = eo + ef;
  out.magnitude = std::abs(eo) + std::abs(ef);
  out.residual = norm2(grad);
  const double scale = std::max(no, nf);
  out.relative_residual = scale > 0.0 ? out.residual / scale : 0.0;
  return out;
}

double phi(const DiscreteFunction& u, const ProblemConfig& cfg) {
  require_same(u.mesh, cfg.mesh, "phi");
  const double e = EnergyFunctional(cfg).value(u.values);
  if (!std::isfinite(e)) throw ValidationError("phi: non-finite energy");
  return e;
}

double weighted_norm(const MeshDomain& m, std::span<const double> g) {
  const auto w = m.node_weights();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * g[i] / w[i];
  return std::sqrt(s);
}

GradientAssembly phi_grad(const DiscreteFunction& u, const ProblemConfig& cfg) {
  require_same(u.mesh, cfg.mesh, "phi_grad");
  GradientAssembly a;
  a.nodal_covector.resize(u.size());
  const EnergyEval e = EnergyFunctional(cfg).evaluate(u.values, a.nodal_covector);
  if (!std::isfinite(e.energy) || !std::isfinite(e.residual)) throw ValidationError("phi_grad: non-finite energy");
  a.energy = e.energy;
  a.residual_norm = e.residual;
  a.relative_residual = e.relative_residual;
  a.weighted_residual = weighted_norm(*u.mesh, a.nodal_covector);
  return a;
}

double apply_L(const DiscreteFunction& u, const DiscreteFunction& v, const ExponentField& p, const WeightField& beta,
               double eps) {
  require_same(u.mesh, v.mesh, "apply_L");
  require_same(u.mesh, p.mesh(), "apply_L");
  require_same(u.mesh, beta.mesh(), "apply_L");
  if (!beta.is_positive()) throw ValidationError("apply_L: beta must be positive on the boundary");
  kernels::PowerFunctional f;
  f.mesh = u.mesh;
  f.epsilon = eps;
  const auto pc = p.cell_values();
  f.gradient_terms.push_back({{pc.begin(), pc.end()}, 1.0, {}});
  f.nodal_terms.push_back(boundary_term(*u.mesh, p, beta));
  kernels::prepare(f);
  std::vector<double> g(u.size());
  kernels::value_and_gradient(f, u.values, g);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * v[i];
  return s;
}

double monotonicity_gap(std::array<double, 2> a, std::array<double, 2> b, double sigma) {
  const auto flux = [sigma](std::array<double, 2> z) -> std::array<double, 2> {
    const double n = std::hypot(z[0], z[1]);
    if (n == 0.0) return {0.0, 0.0};
    const double f = std::pow(n, sigma - 2.0);
    return {f * z[0], f * z[1]};
  };
  const auto fa = flux(a), fb = flux(b);
  return (fa[0] - fb[0]) * (a[0] - b[0]) + (fa[1] - fb[1]) * (a[1] - b[1]);
}

double constraint_G2(const DiscreteFunction& u, const WeightField& alpha, double q) {
  require_same(u.mesh, alpha.mesh(), "constraint_G2");
  const auto w = u.mesh->node_weights();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] != 0.0) s += w[i] * alpha[i] * std::pow(std::abs(u[i]), q - 1.0) * (u[i] > 0 ? 1.0 : -1.0);
  return s;
}

std::vector<double> constraint_G2_gradient(const DiscreteFunction& u, const WeightField& alpha, double q) {
  require_same(u.mesh, alpha.mesh(), "constraint_G2");
  const auto w = u.mesh->node_weights();
  std::vector<double> g(u.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (q == 2.0) g[i] = w[i] * alpha[i];
    else if (u[i] != 0.0) g[i] = (q - 1.0) * w[i] * alpha[i] * std::pow(std::abs(u[i]), q - 2.0);
  }
  return g;
}

HomogeneousParts homogeneous_parts(const DiscreteFunction& u, const ProblemConfig& cfg) {
  require_same(u.mesh, cfg.mesh, "homogeneous_parts");
  const MeshDomain& m = *u.mesh;
  const auto g = u.gradients();
  HomogeneousParts h;
  h.grad_p = grad_power_integral(m, g, cfg.p.cell_values());
  h.grad_q = grad_power_integral(m, g, cfg.q.cell_values());
  const auto w = m.node_weights();
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] != 0.0) h.mass_q += w[i] * cfg.alpha[i] * std::pow(std::abs(u[i]), cfg.q[i]);
  return h;
}

double constraint_G1(const DiscreteFunction& u, const ProblemConfig& cfg) {
  const HomogeneousParts h = homogeneous_parts(u, cfg);
  return h.grad_p + h.grad_q - cfg.lambda * h.mass_q;
}

double rayleigh_q(const DiscreteFunction& u, const WeightField& alpha, double q) {
  require_same(u.mesh, alpha.mesh(), "rayleigh_q");
  const MeshDomain& m = *u.mesh;
  const std::vector<double> qc(m.num_cells(), q);
  const double num = grad_power_integral(m, u.gradients(), qc);
  const auto w = m.node_weights();
  double den = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] != 0.0) den += w[i] * alpha[i] * std::pow(std::abs(u[i]), q);
  if (!(den > 0.0)) throw ValidationError("rayleigh_q: u vanishes at every quadrature point (zero denominator)");
  return num / den;
}

double c_star_quotient(const DiscreteFunction& u, const ProblemConfig& cfg) {
  const double den = m1_norm(u, cfg.M());
  if (!(den > 0.0)) return 0.0;
  return luxemburg_norm(u, cfg.r) / den;
}

ThresholdReport estimate_c_star(const ProblemConfig& cfg, int probes, std::uint64_t seed) {
  cfg.validate();
  if (probes < 1) throw ValidationError("estimate_c_star: probes must be >= 1");
  const ExponentField M = cfg.M();
  const WeightField one = unit_boundary_weight(cfg.mesh);
  const auto quotient = [&](const DiscreteFunction& u) {
    const double den = sobolev_beta_norm(u, M, one);
    return den > 0.0 ? luxemburg_norm(u, cfg.r) / den : 0.0;
  };

  double best = quotient(DiscreteFunction::constant(cfg.mesh, 1.0));
  constexpr int kClimb = 40;
  for (int k = 0; k < probes; ++k) {
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(ss);
    DiscreteFunction u = random_cosine_field(cfg.mesh, rng, 3, true);
    double qu = quotient(u);
    double step = 0.5;
    for (int it = 0; it < kClimb; ++it) {
      DiscreteFunction d = random_cosine_field(cfg.mesh, rng, 3, true);
      const double scale = step * std::max(1e-300, *std::max_element(u.values.begin(), u.values.end(),
                                                                     [](double a, double b) {
                                                                       return std::abs(a) < std::abs(b);
                                                                     }));
      DiscreteFunction trial = u;
      for (std::size_t i = 0; i < trial.size(); ++i) trial.values[i] += std::abs(scale) * d[i];
      const double qt = quotient(trial);
      if (qt > qu) {
        u = std::move(trial);
        qu = qt;
      } else {
        step *= 0.7;
      }
    }
    best = std::max(best, qu);
  }

  ThresholdReport rep;
  rep.c_star_lower = best;
  rep.rho = 0.5 * std::min(1.0 / best, 1.0);
  rep.probes = probes;
  rep.seed = seed;
  rep.subcritical_margin = classify_case(cfg).subcritical_margin;
  if (cfg.robin() && cfg.r.inf() < M.sup()) {
    rep.lambda_cap = lambda_cap(cfg, rep.rho, best);
    const double c2 = std::min({1.0, cfg.beta1.inf(), cfg.beta2.inf()}) / std::max(cfg.p.sup(), cfg.q.sup());
    const double rm = cfg.r.inf();
    rep.sphere_bound = std::pow(rep.rho, rm) * (c2 * std::pow(rep.rho, M.sup() - rm) -
                                                cfg.lambda * cfg.alpha.sup() * std::pow(best, rm) / rm);
  }
  return rep;
}

double lambda_cap(const ProblemConfig& cfg, double rho, double c_star) {
  if (!(c_star > 0.0)) throw ValidationError("lambda_cap: c_star must be positive");
  const double upper = std::min(1.0 / c_star, 1.0);
  if (!(rho > 0.0 && rho < upper))
    throw ValidationError("lambda_cap: rho must lie in (0, min{1/c_star, 1}) = (0, " + std::to_string(upper) + ")");
  const double rm = cfg.r.inf();
  const double Mp = std::max(cfg.p.sup(), cfg.q.sup());
  const double bmin = std::min({1.0, cfg.beta1.inf(), cfg.beta2.inf()});
  return bmin * rm * std::pow(rho, 2.0 * (Mp - rm)) / (Mp * cfg.alpha.sup() * std::pow(c_star, rm));
}

double young_constant(double e, const ExponentField& r, const ExponentField& M) {
  if (!(e > 0.0)) throw ValidationError("young_constant: e must be positive");
  double c = 0.0;
  for (std::size_t i = 0; i < r.values().size(); ++i) {
    const double ri = r[i], mi = M[i];
    if (!(ri < mi)) throw ValidationError("young_constant: requires r < M at every node");
    c = std::max(c, (1.0 - ri / mi) * std::pow(ri / (e * mi), ri / (mi - ri)));
  }
  return c;
}

double coercivity_lower_bound(const DiscreteFunction& u, const ProblemConfig& cfg) {
  const ExponentField M = cfg.M();
  const double c2 = std::min({1.0, cfg.beta1.inf(), cfg.beta2.inf()}) / std::max(cfg.p.sup(), cfg.q.sup());
  const double rm = cfg.r.inf();
  const double ap = cfg.alpha.sup();
  const double modular = sobolev_beta_modular(u, M, unit_boundary_weight(cfg.mesh));
  if (cfg.lambda == 0.0) return 0.5 * c2 * modular;
  const double e = rm * c2 / (2.0 * cfg.lambda * ap);
  const double c1 = young_constant(e, cfg.r, M);
  return 0.5 * c2 * modular - cfg.lambda * ap * c1 * cfg.mesh->area() / rm;
}

}  // namespace pqs
