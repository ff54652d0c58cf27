#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pqspectra/energy.hpp"
#include "pqspectra/fields.hpp"
#include "pqspectra/preconditioner.hpp"

namespace pqs {

enum class DescentStatus { Converged, IterationCap, LineSearchFailed, NonFinite, Infeasible, Stalled };

std::string to_string(DescentStatus s);

struct TraceRow {
  int iter = 0;
  double energy = 0.0;
  double residual = 0.0;
};

/// Callbacks describing one descent problem. evaluate() must fill the
/// covector and report the residuals used for the stopping test. retract()
/// maps a trial point back to the feasible set and returns false when that is
/// impossible; filter() may restrict the search direction to a subspace.
struct DescentProblem {
  std::function<EnergyEval(std::span<const double>, std::span<double>)> evaluate;
  std::function<double(std::span<const double>)> value;
  std::function<bool(std::vector<double>&)> retract;
  std::function<void(std::vector<double>&)> filter;
};

struct DescentOptions {
  SolverTolerances tol;
  int max_iter = 20000;
  double roundoff = 1e-14;  ///< energy increase tolerated by the line search, relative to the energy's magnitude
  int stall_window = 25;    ///< stop after this many steps improving neither the best energy nor the best residual
};

struct DescentResult {
  std::vector<double> u;
  EnergyEval eval;
  int iterations = 0;
  DescentStatus status = DescentStatus::IterationCap;
  std::vector<TraceRow> trace;
  std::string message;
};

/// Preconditioned gradient descent: direction -H^{-1} g, Barzilai-Borwein trial
/// step in the H metric, Armijo backtracking on the retracted trial point.
/// The energy trace is nonincreasing up to options.roundoff.
DescentResult descend(const DescentProblem& problem, std::vector<double> u0, const H1Preconditioner& H,
                      const DescentOptions& options);

/// DescentProblem for Phi_lambda without constraints.
DescentProblem energy_problem(const EnergyFunctional& f);

}  // namespace pqs
