#include "pqspectra/spaces.hpp"

#include <cmath>
#include <sstream>

#include "pqspectra/error.hpp"
#include "pqspectra/format.hpp"

namespace pqs {

namespace {

void require_same(const MeshPtr& a, const MeshPtr& b, const char* what) {
  if (!a || !b || !a->same_as(*b)) throw MeshMismatch(std::string(what) + ": operands live on different meshes");
}

constexpr int kMaxBisection = 400;
constexpr double kRelTol = 1e-12;

}  // namespace

DiscreteFunction::DiscreteFunction(MeshPtr m, std::vector<double> v) : mesh(std::move(m)), values(std::move(v)) {
  if (!mesh) throw ValidationError("DiscreteFunction: null mesh");
  if (values.size() != mesh->num_nodes()) {
    std::ostringstream os;
    os << "DiscreteFunction: expected " << mesh->num_nodes() << " nodal values, got " << values.size();
    throw MeshMismatch(os.str());
  }
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i])) throw ValidationError("DiscreteFunction: non-finite value at node " + std::to_string(i));
}

DiscreteFunction DiscreteFunction::zeros(MeshPtr m) { return constant(std::move(m), 0.0); }

DiscreteFunction DiscreteFunction::constant(MeshPtr m, double c) {
  const std::size_t n = m->num_nodes();
  return DiscreteFunction(std::move(m), std::vector<double>(n, c));
}

std::vector<std::array<double, 2>> DiscreteFunction::gradients() const {
  std::vector<std::array<double, 2>> g(mesh->num_cells());
  kernels::cell_gradients(*mesh, values, g);
  return g;
}

DiscreteFunction DiscreteFunction::scaled(double c) const {
  DiscreteFunction out = *this;
  for (double& x : out.values) x *= c;
  return out;
}

double lebesgue_modular(const DiscreteFunction& u, const ExponentField& p) {
  require_same(u.mesh, p.mesh(), "lebesgue_modular");
  const auto w = u.mesh->node_weights();
  std::vector<double> f(u.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = u[i] == 0.0 ? 0.0 : std::pow(std::abs(u[i]), p[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
  return s;
}

double luxemburg_from_samples(const kernels::ModularSamples& s) {
  bool any = false;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (s.magnitude[k] != 0.0 && s.weight[k] != 0.0) any = true;
  if (!any) return 0.0;

  const auto rho = [&](double tau) { return kernels::modular(s, tau); };
  double lo = 1e-16;
  double hi = std::max(1.0, rho(1.0)) + 1.0;
  int expand = 0;
  while (rho(lo) <= 1.0) {
    lo *= 1e-8;
    if (++expand > 40) throw ConvergenceError("luxemburg_norm: cannot bracket from below (lo=" + format_double(lo) + ")");
  }
  expand = 0;
  while (rho(hi) > 1.0) {
    hi *= 2.0;
    if (++expand > 2000) throw ConvergenceError("luxemburg_norm: cannot bracket from above (hi=" + format_double(hi) + ")");
  }
  // rho(lo) > 1 >= rho(hi); bisect in log tau.
  for (int it = 0; it < kMaxBisection; ++it) {
    if (hi - lo <= kRelTol * 0.25 * hi) return 0.5 * (lo + hi);
    const double mid = std::sqrt(lo * hi);
    const double m = (mid > lo && mid < hi) ? mid : 0.5 * (lo + hi);
    if (rho(m) > 1.0) lo = m;
    else hi = m;
  }
  throw ConvergenceError("luxemburg_norm: bisection budget exhausted with bracket [" + format_double(lo) + ", " +
                         format_double(hi) + "]");
}

double luxemburg_norm(const DiscreteFunction& u, const ExponentField& p) {
  require_same(u.mesh, p.mesh(), "luxemburg_norm");
  const auto w = u.mesh->node_weights();
  kernels::ModularSamples s;
  s.reserve(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) s.push(std::abs(u[i]), p[i], w[i]);
  return luxemburg_from_samples(s);
}

kernels::ModularSamples sobolev_beta_samples(const DiscreteFunction& u, const ExponentField& p,
                                             const WeightField& beta) {
  require_same(u.mesh, p.mesh(), "sobolev_beta_modular");
  require_same(u.mesh, beta.mesh(), "sobolev_beta_modular");
  if (beta.support() != Support::Boundary) throw ValidationError("sobolev_beta_modular: beta must be a boundary weight");
  if (!beta.is_positive())
    throw ValidationError("sobolev_beta_modular: beta must be positive on the boundary (beta == 0 degenerates the norm)");
  const MeshDomain& m = *u.mesh;
  const auto g = u.gradients();
  const auto pc = p.cell_values();
  kernels::ModularSamples s;
  s.reserve(m.num_cells() + m.boundary_quadrature().size());
  for (std::size_t c = 0; c < m.num_cells(); ++c)
    s.push(std::hypot(g[c][0], g[c][1]), pc[c], m.cell_basis()[c].area);
  for (const auto& qp : m.boundary_quadrature()) {
    const auto i = static_cast<std::size_t>(qp.node);
    s.push(std::abs(u[i]), p[i], qp.weight * beta[i]);
  }
  return s;
}

double sobolev_beta_modular(const DiscreteFunction& u, const ExponentField& p, const WeightField& beta) {
  return kernels::modular(sobolev_beta_samples(u, p, beta), 1.0);
}

double sobolev_beta_norm(const DiscreteFunction& u, const ExponentField& p, const WeightField& beta) {
  return luxemburg_from_samples(sobolev_beta_samples(u, p, beta));
}

WeightField unit_boundary_weight(MeshPtr mesh) {
  const std::size_t n = mesh->num_nodes();
  return make_boundary_weight(std::move(mesh), std::vector<double>(n, 1.0));
}

double m1_norm(const DiscreteFunction& u, const ExponentField& M) {
  return sobolev_beta_norm(u, M, unit_boundary_weight(u.mesh));
}

HolderPair holder_pair_bound(const DiscreteFunction& u, const DiscreteFunction& v, const ExponentField& p) {
  require_same(u.mesh, v.mesh, "holder_pair_bound");
  require_same(u.mesh, p.mesh(), "holder_pair_bound");
  const auto w = u.mesh->node_weights();
  HolderPair out;
  for (std::size_t i = 0; i < u.size(); ++i) out.lhs += w[i] * std::abs(u[i] * v[i]);
  std::vector<double> conj(p.values().size());
  for (std::size_t i = 0; i < conj.size(); ++i) conj[i] = p[i] / (p[i] - 1.0);
  const ExponentField pc = make_exponent(p.mesh(), std::move(conj));
  out.rhs = 2.0 * luxemburg_norm(u, p) * luxemburg_norm(v, pc);
  return out;
}

}  // namespace pqs
