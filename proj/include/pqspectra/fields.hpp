#pragma once

#include <span>
#include <string>
#include <vector>

#include "pqspectra/expression.hpp"
#include "pqspectra/mesh.hpp"

namespace pqs {

/// Variable exponent in C+(closure of Omega), stored nodally.
///
/// Values at gradient quadrature points (cell centroids) are the P1 interpolant,
/// i.e. the mean of the three vertex values. Because the interpolant attains
/// its extrema at nodes, inf()/sup() over nodes are exact for the discrete field.
class ExponentField {
 public:
  ExponentField() = default;

  const MeshPtr& mesh() const noexcept { return mesh_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> cell_values() const noexcept { return cell_values_; }
  double operator[](std::size_t node) const noexcept { return values_[node]; }
  double inf() const noexcept { return inf_; }
  double sup() const noexcept { return sup_; }
  bool is_constant() const noexcept { return inf_ == sup_; }
  bool empty() const noexcept { return values_.empty(); }

  friend ExponentField make_exponent(MeshPtr mesh, std::vector<double> values);

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
  std::vector<double> cell_values_;
  double inf_ = 0.0, sup_ = 0.0;
};

/// Validates membership in C+: every nodal value finite and > 1.
/// Throws ValidationError naming the first offending node.
ExponentField make_exponent(MeshPtr mesh, std::vector<double> values);
ExponentField make_exponent(MeshPtr mesh, const Expression& expr);
ExponentField constant_exponent(MeshPtr mesh, double value);

enum class Support { Volume, Boundary };

/// Coefficient field: alpha on Omega (Support::Volume) or beta on the boundary
/// (Support::Boundary). For boundary weights only boundary nodes are read and
/// inf/sup are taken over them (ess inf on the discrete boundary measure).
class WeightField {
 public:
  WeightField() = default;

  const MeshPtr& mesh() const noexcept { return mesh_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t node) const noexcept { return values_[node]; }
  Support support() const noexcept { return support_; }
  double inf() const noexcept { return inf_; }
  double sup() const noexcept { return sup_; }
  /// Identically zero on its support (Neumann data).
  bool is_zero() const noexcept { return sup_ == 0.0 && inf_ == 0.0; }
  bool is_positive() const noexcept { return inf_ > 0.0; }
  bool empty() const noexcept { return values_.empty(); }

  friend WeightField make_volume_weight(MeshPtr mesh, std::vector<double> values);
  friend WeightField make_boundary_weight(MeshPtr mesh, std::vector<double> values);

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
  Support support_ = Support::Volume;
  double inf_ = 0.0, sup_ = 0.0;
};

/// alpha with alpha^- > 0.
WeightField make_volume_weight(MeshPtr mesh, std::vector<double> values);
/// beta with beta^- > 0 on the boundary, or identically zero; mixed signs rejected.
WeightField make_boundary_weight(MeshPtr mesh, std::vector<double> values);
WeightField make_volume_weight(MeshPtr mesh, const Expression& expr);
WeightField make_boundary_weight(MeshPtr mesh, const Expression& expr);

/// M = max{p, q} nodewise.
ExponentField pointwise_max_exponent(const ExponentField& p, const ExponentField& q);

/// Sobolev critical exponent p* = n p/(n - p) where p < n, +infinity elsewhere.
struct CriticalExponent {
  std::vector<double> values;  ///< +inf marks p(x) >= n
  double inf = 0.0;            ///< (p*)^-, possibly +inf
};

CriticalExponent critical_exponent(const ExponentField& m, int dimension);

struct SolverTolerances {
  double residual = 1e-9;           ///< Euclidean norm of the nodal covector of Phi'
  double relative_residual = 1e-7;  ///< residual over the norm of the operator part
  int max_iter = 20000;
  double armijo_c1 = 1e-4;
  double armijo_shrink = 0.5;
  double triviality = 1e-6;  ///< ||u||_{M,1} above this counts as nontrivial

  /// Both residual tests pass, or the residual is below residual * relative_residual,
  /// where the relative test is meaningless (every covector vanishes at u = 0).
  bool accepts(double res, double relative) const noexcept {
    return res < residual && (relative < relative_residual || res < residual * relative_residual);
  }
};

/// One instance of the (p(.), q(.))-Laplacian Robin/Neumann eigenproblem.
struct ProblemConfig {
  MeshPtr mesh;
  ExponentField p, q, r;
  WeightField alpha, beta1, beta2;
  double lambda = 1.0;
  double epsilon_reg = 1e-8;
  SolverTolerances tol;
  int dimension = 2;

  /// Throws ValidationError / MeshMismatch if the data tuple is inconsistent.
  void validate() const;
  ExponentField M() const { return pointwise_max_exponent(p, q); }
  ProblemConfig with_lambda(double l) const {
    ProblemConfig c = *this;
    c.lambda = l;
    return c;
  }
  bool robin() const noexcept { return beta1.is_positive() && beta2.is_positive(); }
  bool neumann() const noexcept { return beta1.is_zero() && beta2.is_zero(); }
};

enum class CaseTag { SublinearA, SmallLambdaB, SuperlinearC, HomogeneousPPlusLtQ, HomogeneousQLtPMinus, Unclassified };

std::string to_string(CaseTag tag);
CaseTag case_from_string(const std::string& s);

struct CaseClass {
  CaseTag tag = CaseTag::Unclassified;
  double subcritical_margin = 0.0;  ///< (M*)^- - r^+, recorded but not enforced
};

/// Total and deterministic; Unclassified is a valid outcome.
CaseClass classify_case(const ProblemConfig& cfg);

}  // namespace pqs
