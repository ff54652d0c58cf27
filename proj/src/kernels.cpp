#include "pqspectra/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "pqspectra/error.hpp"

namespace pqs::kernels {

namespace {

constexpr std::ptrdiff_t kChunk = 512;

/// Sums f(i) for i in [0, n) chunk by chunk; the chunk partition is fixed, so
/// the rounding pattern is independent of the thread count.
template <class F>
double chunked_sum(std::ptrdiff_t n, F&& f) {
  const std::ptrdiff_t chunks = (n + kChunk - 1) / kChunk;
  if (chunks <= 1) {
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) s += f(i);
    return s;
  }
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const std::ptrdiff_t end = std::min(n, (c + 1) * kChunk);
    double s = 0.0;
    for (std::ptrdiff_t i = c * kChunk; i < end; ++i) s += f(i);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

inline std::array<double, 2> cell_gradient(const MeshDomain& m, std::size_t c, std::span<const double> u) {
  const auto& cell = m.cells()[c];
  const auto& b = m.cell_basis()[c];
  std::array<double, 2> g{0.0, 0.0};
  for (std::size_t k = 0; k < 3; ++k) {
    const double uk = u[static_cast<std::size_t>(cell[k])];
    g[0] += uk * b.grad[k][0];
    g[1] += uk * b.grad[k][1];
  }
  return g;
}

struct CellEval {
  double energy = 0.0;
  std::array<double, 2> flux{0.0, 0.0};  // area-weighted
};

/// value: coef/s [(g2 + eps^2)^{s/2} - eps^s]; flux factor: coef (g2 + eps^2)^{s/2 - 1}
template <bool WithFlux>
CellEval eval_cell(const PowerFunctional& f, std::size_t c, std::span<const double> u, double eps2) {
  const auto g = cell_gradient(*f.mesh, c, u);
  const double g2 = g[0] * g[0] + g[1] * g[1];
  const double e = g2 + eps2;
  double energy = 0.0, factor = 0.0;
  for (const auto& t : f.gradient_terms) {
    const double s = t.exponent[c];
    if (e == 0.0) continue;
    const double pw = std::pow(e, 0.5 * s);
    const double eps_pow = t.eps_pow.empty() ? (eps2 == 0.0 ? 0.0 : std::pow(eps2, 0.5 * s)) : t.eps_pow[c];
    energy += t.coefficient / s * (pw - eps_pow);
    if constexpr (WithFlux) factor += t.coefficient * pw / e;
  }
  const double area = f.mesh->cell_basis()[c].area;
  CellEval out;
  out.energy = area * energy;
  if constexpr (WithFlux) out.flux = {area * factor * g[0], area * factor * g[1]};
  return out;
}

/// Returns coef/e |u|^e and stores coef |u|^{e-2} u in deriv.
inline double eval_node(double u, double e, double coef, double& deriv) {
  if (u == 0.0 || coef == 0.0) {
    deriv = 0.0;
    return 0.0;
  }
  const double pw = std::pow(std::abs(u), e);
  deriv = coef * pw / u;
  return coef / e * pw;
}

void check(const PowerFunctional& f, std::span<const double> u) {
  if (!f.mesh || u.size() != f.mesh->num_nodes()) throw MeshMismatch("power functional: vector size mismatch");
}

}  // namespace

void prepare(PowerFunctional& f) {
  const double eps2 = f.epsilon * f.epsilon;
  for (auto& t : f.gradient_terms) {
    t.eps_pow.resize(t.exponent.size());
    for (std::size_t c = 0; c < t.exponent.size(); ++c)
      t.eps_pow[c] = eps2 == 0.0 ? 0.0 : std::pow(eps2, 0.5 * t.exponent[c]);
  }
}

double sum(std::span<const double> v, Exec exec) {
  if (exec == Exec::Serial) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  return chunked_sum(static_cast<std::ptrdiff_t>(v.size()),
                     [&](std::ptrdiff_t i) { return v[static_cast<std::size_t>(i)]; });
}

double modular(const ModularSamples& s, double tau, Exec exec) {
  const auto term = [&](std::size_t k) {
    const double m = s.magnitude[k];
    if (m == 0.0 || s.weight[k] == 0.0) return 0.0;
    return s.weight[k] * std::pow(m / tau, s.exponent[k]);
  };
  if (exec == Exec::Serial) {
    double r = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) r += term(k);
    return r;
  }
  return chunked_sum(static_cast<std::ptrdiff_t>(s.size()),
                     [&](std::ptrdiff_t k) { return term(static_cast<std::size_t>(k)); });
}

void cell_gradients(const MeshDomain& m, std::span<const double> u, std::span<std::array<double, 2>> out, Exec exec) {
  const auto n = static_cast<std::ptrdiff_t>(m.num_cells());
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t c = 0; c < n; ++c)
      out[static_cast<std::size_t>(c)] = cell_gradient(m, static_cast<std::size_t>(c), u);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n; ++c)
    out[static_cast<std::size_t>(c)] = cell_gradient(m, static_cast<std::size_t>(c), u);
}

double value(const PowerFunctional& f, std::span<const double> u, Exec exec) {
  check(f, u);
  const double eps2 = f.epsilon * f.epsilon;
  const std::size_t ncells = f.gradient_terms.empty() ? 0 : f.mesh->num_cells();
  double dummy = 0.0;
  if (exec == Exec::Serial) {
    double e = 0.0;
    for (std::size_t c = 0; c < ncells; ++c) e += eval_cell<false>(f, c, u, eps2).energy;
    for (const auto& t : f.nodal_terms)
      for (std::size_t k = 0; k < t.nodes.size(); ++k)
        e += eval_node(u[static_cast<std::size_t>(t.nodes[k])], t.exponent[k], t.coefficient[k], dummy);
    return e;
  }
  double e = chunked_sum(static_cast<std::ptrdiff_t>(ncells), [&](std::ptrdiff_t c) {
    return eval_cell<false>(f, static_cast<std::size_t>(c), u, eps2).energy;
  });
  for (const auto& t : f.nodal_terms)
    e += chunked_sum(static_cast<std::ptrdiff_t>(t.nodes.size()), [&](std::ptrdiff_t k) {
      const auto kk = static_cast<std::size_t>(k);
      double d = 0.0;
      return eval_node(u[static_cast<std::size_t>(t.nodes[kk])], t.exponent[kk], t.coefficient[kk], d);
    });
  return e;
}

double value_and_gradient(const PowerFunctional& f, std::span<const double> u, std::span<double> grad, Exec exec) {
  check(f, u);
  if (grad.size() != u.size()) throw MeshMismatch("power functional: gradient size mismatch");
  const MeshDomain& m = *f.mesh;
  const double eps2 = f.epsilon * f.epsilon;
  const std::size_t ncells = f.gradient_terms.empty() ? 0 : m.num_cells();

  if (exec == Exec::Serial) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double e = 0.0;
    for (std::size_t c = 0; c < ncells; ++c) {
      const CellEval ce = eval_cell<true>(f, c, u, eps2);
      e += ce.energy;
      const auto& cell = m.cells()[c];
      const auto& b = m.cell_basis()[c];
      for (std::size_t k = 0; k < 3; ++k)
        grad[static_cast<std::size_t>(cell[k])] += ce.flux[0] * b.grad[k][0] + ce.flux[1] * b.grad[k][1];
    }
    for (const auto& t : f.nodal_terms)
      for (std::size_t k = 0; k < t.nodes.size(); ++k) {
        const auto i = static_cast<std::size_t>(t.nodes[k]);
        double d = 0.0;
        e += eval_node(u[i], t.exponent[k], t.coefficient[k], d);
        grad[i] += d;
      }
    return e;
  }

  std::vector<CellEval> cells(ncells);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(ncells); ++c)
    cells[static_cast<std::size_t>(c)] = eval_cell<true>(f, static_cast<std::size_t>(c), u, eps2);
  double e = chunked_sum(static_cast<std::ptrdiff_t>(ncells),
                         [&](std::ptrdiff_t c) { return cells[static_cast<std::size_t>(c)].energy; });

  const auto offsets = m.incident_offsets();
  const auto inc = m.incident_cells();
  const auto slots = m.incident_slots();
  const auto nn = static_cast<std::ptrdiff_t>(m.num_nodes());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < nn; ++i) {
    double gi = 0.0;
    if (ncells > 0) {
      for (int a = offsets[static_cast<std::size_t>(i)]; a < offsets[static_cast<std::size_t>(i) + 1]; ++a) {
        const auto c = static_cast<std::size_t>(inc[static_cast<std::size_t>(a)]);
        const auto& bg = m.cell_basis()[c].grad[static_cast<std::size_t>(slots[static_cast<std::size_t>(a)])];
        gi += cells[c].flux[0] * bg[0] + cells[c].flux[1] * bg[1];
      }
    }
    grad[static_cast<std::size_t>(i)] = gi;
  }
  // Each nodal term lists a node at most once, so the node loop is race free.
  for (const auto& t : f.nodal_terms) {
    const auto nt = static_cast<std::ptrdiff_t>(t.nodes.size());
    std::vector<double> energies(t.nodes.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < nt; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const auto i = static_cast<std::size_t>(t.nodes[kk]);
      double d = 0.0;
      energies[kk] = eval_node(u[i], t.exponent[kk], t.coefficient[kk], d);
      grad[i] += d;
    }
    e += chunked_sum(nt, [&](std::ptrdiff_t k) { return energies[static_cast<std::size_t>(k)]; });
  }
  return e;
}

}  // namespace pqs::kernels
