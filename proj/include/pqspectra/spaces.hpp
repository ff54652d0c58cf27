#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pqspectra/fields.hpp"
#include "pqspectra/kernels.hpp"
#include "pqspectra/mesh.hpp"

namespace pqs {

/// Nodal P1 function on a mesh.
struct DiscreteFunction {
  MeshPtr mesh;
  std::vector<double> values;

  DiscreteFunction() = default;
  /// Throws MeshMismatch on a size mismatch and ValidationError on non-finite values.
  DiscreteFunction(MeshPtr m, std::vector<double> v);

  static DiscreteFunction zeros(MeshPtr m);
  static DiscreteFunction constant(MeshPtr m, double c);
  template <class F>
  static DiscreteFunction interpolate(MeshPtr m, F&& f) {
    std::vector<double> v;
    v.reserve(m->num_nodes());
    for (const auto& pt : m->nodes()) v.push_back(f(pt.x, pt.y));
    return DiscreteFunction(std::move(m), std::move(v));
  }

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const noexcept { return values[i]; }
  std::span<const double> span() const noexcept { return values; }

  /// Cellwise constant gradient.
  std::vector<std::array<double, 2>> gradients() const;

  DiscreteFunction scaled(double c) const;
};

/// int_Omega |u|^{p(x)} dx.
double lebesgue_modular(const DiscreteFunction& u, const ExponentField& p);

/// inf{tau > 0 : int |u/tau|^p <= 1}; 0 for u == 0.
double luxemburg_norm(const DiscreteFunction& u, const ExponentField& p);

/// int |grad u|^p dx + int_bd beta |u|^p dsigma.
double sobolev_beta_modular(const DiscreteFunction& u, const ExponentField& p, const WeightField& beta);

/// Luxemburg norm generated by sobolev_beta_modular.
double sobolev_beta_norm(const DiscreteFunction& u, const ExponentField& p, const WeightField& beta);

/// beta == 1 on the boundary.
WeightField unit_boundary_weight(MeshPtr mesh);

/// ||u||_{M,1}: sobolev_beta_norm with exponent M = max{p, q} and beta == 1.
double m1_norm(const DiscreteFunction& u, const ExponentField& M);

struct HolderPair {
  double lhs = 0.0;  ///< int |u v|
  double rhs = 0.0;  ///< 2 ||u||_p ||v||_{p'}
};

HolderPair holder_pair_bound(const DiscreteFunction& u, const DiscreteFunction& v, const ExponentField& p);

/// Root of tau -> modular(tau) = 1 for the sampled modular; 0 when every magnitude vanishes.
/// Throws ConvergenceError with the bracket state if the bisection budget runs out.
double luxemburg_from_samples(const kernels::ModularSamples& s);

kernels::ModularSamples sobolev_beta_samples(const DiscreteFunction& u, const ExponentField& p,
                                             const WeightField& beta);

}  // namespace pqs
