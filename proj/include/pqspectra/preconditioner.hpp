#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pqspectra/mesh.hpp"

namespace pqs {

/// Sobolev-gradient metric H = K_w + shift * M on P1 nodal vectors, where K_w is
/// the stiffness matrix with per-cell weights and M the lumped mass matrix.
/// Factored once with a sparse LDL^T decomposition.
class H1Preconditioner {
 public:
  explicit H1Preconditioner(const MeshDomain& m, double shift = 1.0, std::span<const double> cell_weights = {});
  ~H1Preconditioner();
  H1Preconditioner(H1Preconditioner&&) noexcept;
  H1Preconditioner& operator=(H1Preconditioner&&) noexcept;

  /// out = H^{-1} g
  void solve(std::span<const double> g, std::span<double> out) const;
  /// a^T H b
  double inner(std::span<const double> a, std::span<const double> b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pqs
