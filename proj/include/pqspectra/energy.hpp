#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pqspectra/fields.hpp"
#include "pqspectra/kernels.hpp"
#include "pqspectra/spaces.hpp"

namespace pqs {

/// Result of one energy evaluation with its derivative.
struct EnergyEval {
  double energy = 0.0;
  double residual = 0.0;           ///< Euclidean norm of the nodal covector
  double relative_residual = 0.0;  ///< residual over the larger of the operator and forcing covectors
  double magnitude = 0.0;          ///< sum of the absolute values of the energy's parts (roundoff scale)
};

/// Compiled Phi_lambda for one ProblemConfig.
///
/// Phi_lambda(u) = int 1/p |grad u|^p + 1/q |grad u|^q
///               + int_bd beta1/p |u|^p + beta2/q |u|^q
///               - lambda int alpha/r |u|^r
/// with |grad u|^s read as (|grad u|^2 + eps^2)^{s/2} - eps^s. The offset makes
/// Phi(0) = 0 for every eps, and the derivative is unchanged by it.
class EnergyFunctional {
 public:
  explicit EnergyFunctional(const ProblemConfig& cfg);

  double value(std::span<const double> u) const;
  /// Writes the covector of Phi' into grad.
  EnergyEval evaluate(std::span<const double> u, std::span<double> grad) const;

  const ProblemConfig& config() const noexcept { return cfg_; }
  const MeshPtr& mesh() const noexcept { return cfg_.mesh; }

 private:
  ProblemConfig cfg_;
  kernels::PowerFunctional op_;       // gradient and boundary terms
  kernels::PowerFunctional forcing_;  // -lambda alpha/r |u|^r
};

/// v -> <Phi'(u), v> represented by its nodal covector.
struct GradientAssembly {
  std::vector<double> nodal_covector;
  double energy = 0.0;
  double residual_norm = 0.0;      ///< Euclidean norm of nodal_covector
  double weighted_residual = 0.0;  ///< sqrt(sum g_i^2 / w_i): lumped L2 dual norm
  double relative_residual = 0.0;
};

double phi(const DiscreteFunction& u, const ProblemConfig& cfg);
GradientAssembly phi_grad(const DiscreteFunction& u, const ProblemConfig& cfg);

/// Lumped L2 dual norm of a covector.
double weighted_norm(const MeshDomain& m, std::span<const double> g);

/// <L_{p,beta}(u), v> = int |grad u|^{p-2} grad u . grad v + int_bd beta |u|^{p-2} u v,
/// with the gradient magnitude regularized by eps.
double apply_L(const DiscreteFunction& u, const DiscreteFunction& v, const ExponentField& p, const WeightField& beta,
               double eps = 0.0);

/// (|a|^{s-2} a - |b|^{s-2} b) . (a - b)
double monotonicity_gap(std::array<double, 2> a, std::array<double, 2> b, double sigma);

/// int alpha |u|^{q-2} u.
double constraint_G2(const DiscreteFunction& u, const WeightField& alpha, double q);
/// Covector of G2'.
std::vector<double> constraint_G2_gradient(const DiscreteFunction& u, const WeightField& alpha, double q);

/// int |grad u|^p + |grad u|^q - lambda int alpha |u|^q, unregularized.
double constraint_G1(const DiscreteFunction& u, const ProblemConfig& cfg);

/// Integrals used by the homogeneous-case solvers; unregularized gradients.
struct HomogeneousParts {
  double grad_p = 0.0;  ///< int |grad u|^p
  double grad_q = 0.0;  ///< int |grad u|^q
  double mass_q = 0.0;  ///< int alpha |u|^q
};
HomogeneousParts homogeneous_parts(const DiscreteFunction& u, const ProblemConfig& cfg);

/// int |grad u|^q / int alpha |u|^q.
double rayleigh_q(const DiscreteFunction& u, const WeightField& alpha, double q);

struct ThresholdReport {
  double c_star_lower = 0.0;  ///< best quotient ||u||_{L^r} / ||u||_{M,1} over the probes
  double rho = 0.0;           ///< ball radius, 0.5 min{1/c_star, 1}
  double lambda_cap = 0.0;    ///< Lambda(rho, c_star); 0 unless SmallLambda-B
  double sphere_bound = 0.0;  ///< guaranteed lower bound of Phi on the rho-sphere for lambda below the cap
  double subcritical_margin = 0.0;
  int probes = 0;
  std::uint64_t seed = 0;
};

/// Probe-based lower estimate of C* = sup ||u||_{L^{r}} / ||u||_{M,1}. Each probe is
/// hill-climbed independently from its own sub-seed, so more probes never lower the estimate.
ThresholdReport estimate_c_star(const ProblemConfig& cfg, int probes, std::uint64_t seed);

/// ||u||_{L^r} / ||u||_{M,1}.
double c_star_quotient(const DiscreteFunction& u, const ProblemConfig& cfg);

/// min{1,b1-,b2-} r- rho^{2(M+ - r-)} / (max{p+,q+} alpha+ c_star^{r-}).
double lambda_cap(const ProblemConfig& cfg, double rho, double c_star);

/// Young constant C1 with |u|^r <= e |u|^M + C1 at every node (r < M).
double young_constant(double e, const ExponentField& r, const ExponentField& M);

/// Right-hand side of the coercivity estimate for the sublinear case:
/// (C2/2)(int |grad u|^M + int_bd |u|^M) - lambda alpha+ C1 |Omega| / r-, with the
/// Young parameter e = r- C2 / (2 lambda alpha+).
double coercivity_lower_bound(const DiscreteFunction& u, const ProblemConfig& cfg);

/// Smooth random field sum_{k,l<=modes} c_kl cos(k pi x/lx) cos(l pi y/ly), c_kl uniform in [-1,1].
template <class Rng>
DiscreteFunction random_cosine_field(const MeshPtr& mesh, Rng& rng, int modes, bool include_constant);

}  // namespace pqs

#include "pqspectra/detail/random_field.hpp"
