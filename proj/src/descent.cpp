#include "pqspectra/descent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pqspectra/format.hpp"

namespace pqs {

std::string to_string(DescentStatus s) {
  switch (s) {
    case DescentStatus::Converged: return "converged";
    case DescentStatus::IterationCap: return "iteration_cap";
    case DescentStatus::LineSearchFailed: return "line_search_failed";
    case DescentStatus::NonFinite: return "non_finite";
    case DescentStatus::Infeasible: return "infeasible";
    case DescentStatus::Stalled: return "stalled";
  }
  return "unknown";
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool converged(const EnergyEval& e, const SolverTolerances& tol) {
  return tol.accepts(e.residual, e.relative_residual);
}

}  // namespace

DescentProblem energy_problem(const EnergyFunctional& f) {
  DescentProblem p;
  p.evaluate = [&f](std::span<const double> u, std::span<double> g) { return f.evaluate(u, g); };
  p.value = [&f](std::span<const double> u) { return f.value(u); };
  return p;
}

DescentResult descend(const DescentProblem& problem, std::vector<double> u0, const H1Preconditioner& H,
                      const DescentOptions& options) {
  const std::size_t n = u0.size();
  DescentResult res;
  if (problem.retract && !problem.retract(u0)) {
    res.u = std::move(u0);
    res.status = DescentStatus::Infeasible;
    res.message = "initial point cannot be retracted onto the feasible set";
    return res;
  }
  std::vector<double> u = std::move(u0), g(n), d(n), trial(n), g_new(n), s(n), y(n);
  EnergyEval e = problem.evaluate(u, g);
  if (!std::isfinite(e.energy) || !std::isfinite(e.residual)) {
    res.u = std::move(u);
    res.eval = e;
    res.status = DescentStatus::NonFinite;
    res.message = "non-finite energy at the initial point";
    return res;
  }

  double step = 1.0;
  bool have_bb = false;
  double best_energy = e.energy, best_residual = e.residual;
  int stalled = 0;
  const auto& tol = options.tol;
  int it = 0;
  for (;; ++it) {
    res.trace.push_back({it, e.energy, e.residual});
    if (converged(e, tol)) {
      res.status = DescentStatus::Converged;
      break;
    }
    if (stalled >= options.stall_window) {
      res.status = DescentStatus::Stalled;
      std::ostringstream os;
      os << "no decrease of energy or residual in " << options.stall_window << " iterations (energy "
         << format_double(e.energy) << ", residual " << format_double(e.residual) << ")";
      res.message = os.str();
      break;
    }
    if (it >= options.max_iter) {
      res.status = DescentStatus::IterationCap;
      break;
    }
    H.solve(g, d);
    for (double& x : d) x = -x;
    if (problem.filter) problem.filter(d);

    double t = step;
    bool accepted = false;
    EnergyEval e_new;
    double noise = options.roundoff * std::max(e.magnitude, std::abs(e.energy));
    for (int k = 0; k < 80; ++k, t *= tol.armijo_shrink) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + t * d[i];
      if (problem.retract && !problem.retract(trial)) continue;
      for (std::size_t i = 0; i < n; ++i) s[i] = trial[i] - u[i];
      const double slope = std::min(dot(g, s), 0.0);
      const double et = problem.value(trial);
      if (!std::isfinite(et)) continue;
      if (et <= e.energy + tol.armijo_c1 * slope + noise) {
        e_new = problem.evaluate(trial, g_new);
        if (!std::isfinite(e_new.energy) || !std::isfinite(e_new.residual)) continue;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.status = DescentStatus::LineSearchFailed;
      std::ostringstream os;
      os << "line search failed at iteration " << it << " (energy " << format_double(e.energy) << ", residual "
         << format_double(e.residual) << ")";
      res.message = os.str();
      break;
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = g_new[i] - g[i];
    // Barzilai-Borwein step in the H metric, measured along the unit direction d.
    const double sy = dot(s, y);
    const double sHs = H.inner(s, s);
    const double dHd = H.inner(d, d);
    if (sy > 0.0 && dHd > 0.0) {
      const double bb = sHs / sy;  // scales H^{-1} g
      step = std::clamp(bb, 1e-12, 1e12);
      have_bb = true;
    } else {
      step = have_bb ? step : std::min(2.0 * t, 1e12);
    }
    u.swap(trial);
    g.swap(g_new);
    e = e_new;
    const bool improved = e.energy < best_energy - noise || e.residual < best_residual * (1.0 - 1e-9);
    if (improved) stalled = 0;
    else ++stalled;
    best_energy = std::min(best_energy, e.energy);
    best_residual = std::min(best_residual, e.residual);
  }
  res.u = std::move(u);
  res.eval = e;
  res.iterations = it;
  if (res.message.empty()) res.message = to_string(res.status);
  return res;
}

}  // namespace pqs
