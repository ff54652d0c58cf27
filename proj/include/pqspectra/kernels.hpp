#pragma once

#include <span>
#include <vector>

#include "pqspectra/mesh.hpp"

/// Data-parallel inner loops of the solver.
///
/// Every kernel has a serial reference path and an OpenMP path selected by
/// Exec. The OpenMP path reduces over fixed-size chunks and gathers nodal
/// contributions through the mesh's node-to-cell incidence, so its result does
/// not depend on the number of threads. The serial path is a plain loop and is
/// kept as the reference the parallel path is tested against.
namespace pqs::kernels {

enum class Exec { Serial, Parallel };

/// Samples of a modular rho(tau) = sum_k weight_k * (magnitude_k / tau)^exponent_k.
struct ModularSamples {
  std::vector<double> magnitude;
  std::vector<double> exponent;
  std::vector<double> weight;

  void reserve(std::size_t n) {
    magnitude.reserve(n);
    exponent.reserve(n);
    weight.reserve(n);
  }
  void push(double m, double e, double w) {
    magnitude.push_back(m);
    exponent.push_back(e);
    weight.push_back(w);
  }
  std::size_t size() const noexcept { return magnitude.size(); }
};

double modular(const ModularSamples& s, double tau, Exec exec = Exec::Parallel);

/// sum over cells of area * coefficient / s_c * [(|grad u|^2 + eps^2)^{s_c/2} - eps^{s_c}]
struct GradientTerm {
  std::vector<double> exponent;  ///< per cell
  double coefficient = 1.0;
  std::vector<double> eps_pow;   ///< eps^{s_c}; filled by prepare()
};

/// sum over listed nodes of coefficient_i / e_i * |u_i|^{e_i}; the coefficient
/// carries the quadrature weight.
struct NodalTerm {
  std::vector<int> nodes;
  std::vector<double> exponent;
  std::vector<double> coefficient;
};

/// Separable power-type functional on a P1 mesh. Phi_lambda, the Nehari
/// defect and the Rayleigh numerator/denominator are all instances.
struct PowerFunctional {
  MeshPtr mesh;
  double epsilon = 0.0;
  std::vector<GradientTerm> gradient_terms;
  std::vector<NodalTerm> nodal_terms;
};

/// Caches eps^{s_c} for every gradient term. Call after the terms are set.
void prepare(PowerFunctional& f);

double value(const PowerFunctional& f, std::span<const double> u, Exec exec = Exec::Parallel);

/// Writes the nodal covector dF(u)[phi_i] into grad and returns F(u).
double value_and_gradient(const PowerFunctional& f, std::span<const double> u, std::span<double> grad,
                          Exec exec = Exec::Parallel);

/// Cellwise constant gradients of the P1 interpolant of u.
void cell_gradients(const MeshDomain& m, std::span<const double> u, std::span<std::array<double, 2>> out,
                    Exec exec = Exec::Parallel);

/// Thread-count independent sum.
double sum(std::span<const double> v, Exec exec = Exec::Parallel);

}  // namespace pqs::kernels
