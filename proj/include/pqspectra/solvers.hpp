#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pqspectra/descent.hpp"
#include "pqspectra/energy.hpp"
#include "pqspectra/fields.hpp"
#include "pqspectra/spaces.hpp"

namespace pqs {

/// Critical-point candidate produced by a solver.
struct SolveReport {
  DiscreteFunction u;
  double energy = 0.0;
  double residual = 0.0;  ///< Euclidean norm of the covector of Phi'(u), recomputed from (u, cfg)
  double relative_residual = 0.0;
  double weighted_residual = 0.0;
  double u_norm = 0.0;  ///< ||u||_{M,1}
  int iterations = 0;
  bool converged = false;
  bool nontrivial = false;
  CaseClass case_class;
  std::optional<double> c, d, a;  ///< Lagrange multipliers when the solver is constrained
  double stationarity = 0.0;      ///< post-fit residual of the multiplier system
  std::vector<TraceRow> trace;
  std::string status;  ///< converged, iteration_cap, line_search_failed, below_threshold, ...
  std::string message;
  int seed = -1;  ///< index of the seed or restart the report came from

  bool found() const noexcept { return converged && nontrivial; }
};

/// Descent on Phi_lambda from u0. A trivial start (||u0||_{M,1} <= triviality) is
/// first moved to t*1 with the largest t in {1, 1/2, 1/4, ...} giving Phi < 0,
/// because u = 0 is itself a critical point.
SolveReport minimize_descent(const ProblemConfig& cfg, const DiscreteFunction& u0, int max_iter);

/// k sine bumps with pairwise disjoint nodal supports on a grid of subrectangles.
/// Throws ValidationError when a subrectangle would be narrower than 2 cells.
std::vector<DiscreteFunction> disjoint_support_seeds(const MeshPtr& mesh, int k, double amplitude);

struct FamilyOptions {
  double amplitude = 0.5;  ///< seed j is scaled by amplitude * 2^{-(j-1)}
  double dedup_distance = 1e-6;
};

/// Sublinear case: descent from k seeds built out of disjoint-support bumps, seed j
/// restricted to the j-th reflection parity class (even-even, odd-even, odd-odd,
/// even-odd) when the mesh and data are symmetric. Returns deduplicated converged
/// nontrivial reports with Phi <= 0, sorted by ||u||_{M,1} in decreasing order.
std::vector<SolveReport> solve_sublinear_family(const ProblemConfig& cfg, int k, const FamilyOptions& opt = {});

struct BallResult {
  SolveReport report;
  double rho = 0.0;
  bool interior = false;
  std::vector<double> sphere_energies;
  double energy_lower_bound = 0.0;  ///< -lambda alpha+ (C* rho)^{r-} / r-
};

/// Projected descent in {||u||_{M,1} <= rho}, started from t*1.
BallResult minimize_in_ball(const ProblemConfig& cfg, const ThresholdReport& thresholds, int sphere_samples = 32,
                            std::uint64_t seed = 0);

struct MountainPassOptions {
  int max_path_iter = 400;
  int reparam_every = 10;
  int sphere_samples = 32;
  int c_star_probes = 8;
  double switch_relative_residual = 1e-3;  ///< path phase hands over to the polish below this
  std::uint64_t seed = 0;
};

struct MountainPassResult {
  SolveReport report;
  double eta = 0.0;
  double b = 0.0;  ///< minimum of Phi over the sampled eta-sphere
  double c_star_lower = 0.0;
  double path_max = 0.0;  ///< max of Phi along the final path
  int path_iterations = 0;
  bool endpoints_preserved = true;
  double nehari_residual = 0.0;  ///< |<Phi'(u), u>|
  std::vector<std::vector<double>> path;
};

struct SphereLevel {
  double c_star_lower = 0.0;
  double eta = 0.0;  ///< radius with positive sampled energy, halved from 0.5 min{1/C*, 1} as needed
  double b = 0.0;    ///< minimum of Phi over the sampled eta-sphere
  int halvings = 0;
};

/// Sampled mountain geometry: Phi on random points of the eta-sphere in ||.||_{M,1}.
/// Throws PreconditionError when no radius with positive sampled energy is found.
SphereLevel sample_sphere_level(const ProblemConfig& cfg, int c_star_probes, int samples, std::uint64_t seed);

/// Elastic-string mountain pass on the straight path 0 -> zeta, followed by a
/// polish that descends on Phi with iterates kept at the maximum of Phi along their ray.
MountainPassResult mountain_pass(const ProblemConfig& cfg, const DiscreteFunction& zeta, int path_points = 21,
                                 const MountainPassOptions& opt = {});

/// zeta = t*1 with t = 2^k the first power with Phi(t*1) < 0 and ||t*1||_{M,1} > eta.
DiscreteFunction mountain_pass_endpoint(const ProblemConfig& cfg, double eta);

/// t > 0 with int t^{p-q} |grad u|^p = lambda int alpha |u|^q - int |grad u|^q.
/// PreconditionError when p - q changes sign or the right side is not positive.
double nehari_project(const DiscreteFunction& u, const ProblemConfig& cfg);

/// Shifts u by the constant s with int alpha |u - s|^{q-2}(u - s) = 0; returns s.
double project_shift(std::vector<double>& u, const MeshDomain& m, const WeightField& alpha, double q);

struct LagrangeResiduals {
  double c_test = 0.0;  ///< -<Phi', u> / int (p - q)|grad u|^p
  double d_test = 0.0;  ///< -<Phi', 1> / ((q - 1) int alpha |u|^{q-2})
  double c = 0.0;       ///< least-squares multipliers for Phi' + c G1' + d G2' = 0
  double d = 0.0;
  double stationarity = 0.0;  ///< Euclidean norm of Phi' + c G1' + d G2'
  double a_coefficient = 0.0; ///< int (p - q)|grad u|^p
  double b_coefficient = 0.0; ///< (q - 1) int alpha |u|^{q-2}
};

LagrangeResiduals lagrange_residuals(const DiscreteFunction& u, const ProblemConfig& cfg);

enum class ConstraintSpace { Cq, C };

struct SigmaEstimate {
  double value = 0.0;                 ///< best Rayleigh quotient over the restarts
  std::vector<double> samples;        ///< per restart, in restart order
  std::vector<DiscreteFunction> minimizers;  ///< per restart, normalized int alpha |u|^q = 1
  std::vector<std::string> status;
  double spread() const;
};

/// Minimizes int |grad u|^q / int alpha |u|^q over int alpha |u|^{q-2} u = 0.
/// Requires constant q. Both constraint spaces coincide on the nodal space.
SigmaEstimate sigma_threshold(const ProblemConfig& cfg, ConstraintSpace space, int restarts, std::uint64_t seed);

/// Minimizes Phi over the Nehari set inside C_q (p+ < q).
SolveReport nehari_minimize(const ProblemConfig& cfg, int restarts, std::uint64_t seed);
/// Same, from precomputed Rayleigh minimizers (shared across a sweep).
SolveReport nehari_minimize(const ProblemConfig& cfg, const SigmaEstimate& starts);

/// Global minimizer of Phi over C (q < p-).
SolveReport constrained_global_minimize(const ProblemConfig& cfg, std::uint64_t seed, int restarts = 4);
SolveReport constrained_global_minimize(const ProblemConfig& cfg, const SigmaEstimate& starts);

struct SweepRecord {
  double lambda = 0.0;
  bool found = false;
  double energy = 0.0, residual = 0.0, u_norm = 0.0;
  double sigma_ref = 0.0;
  double c = 0.0, d = 0.0;  ///< multipliers (d doubles as a in the q < p- case)
  std::string status;
};

struct SweepOptions {
  int jobs = 1;
  int restarts = 4;
  std::uint64_t seed = 0;
};

struct SweepResult {
  std::vector<SweepRecord> records;  ///< sorted by lambda
  SigmaEstimate sigma;
  bool monotone = true;  ///< found never switches from true back to false along the grid
  std::vector<double> violations;
};

/// Runs the homogeneous-case solver at every lambda with a pool of opt.jobs workers.
SweepResult eigen_sweep(const ProblemConfig& cfg, const std::vector<double>& lambdas, const SweepOptions& opt = {});

/// Same, reusing a sigma estimate computed by the caller.
SweepResult eigen_sweep(const ProblemConfig& cfg, const std::vector<double>& lambdas, const SigmaEstimate& sigma,
                        const SweepOptions& opt = {});

/// n points geometrically spaced over [lo, hi].
std::vector<double> geometric_grid(double lo, double hi, int n);

}  // namespace pqs
