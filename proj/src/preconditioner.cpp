#include "pqspectra/preconditioner.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "pqspectra/error.hpp"

namespace pqs {

struct H1Preconditioner::Impl {
  Eigen::SparseMatrix<double> H;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

H1Preconditioner::H1Preconditioner(const MeshDomain& m, double shift, std::span<const double> cell_weights)
    : impl_(std::make_unique<Impl>()) {
  if (!cell_weights.empty() && cell_weights.size() != m.num_cells())
    throw MeshMismatch("H1Preconditioner: one weight per cell expected");
  const auto n = static_cast<Eigen::Index>(m.num_nodes());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m.num_cells() * 9 + m.num_nodes());
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto& cell = m.cells()[c];
    const auto& b = m.cell_basis()[c];
    const double w = (cell_weights.empty() ? 1.0 : cell_weights[c]) * b.area;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        trip.emplace_back(cell[i], cell[j], w * (b.grad[i][0] * b.grad[j][0] + b.grad[i][1] * b.grad[j][1]));
  }
  const auto nw = m.node_weights();
  for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, shift * nw[static_cast<std::size_t>(i)]);
  impl_->H.resize(n, n);
  impl_->H.setFromTriplets(trip.begin(), trip.end());
  impl_->ldlt.compute(impl_->H);
  if (impl_->ldlt.info() != Eigen::Success) throw ConvergenceError("H1Preconditioner: factorization failed");
}

H1Preconditioner::~H1Preconditioner() = default;
H1Preconditioner::H1Preconditioner(H1Preconditioner&&) noexcept = default;
H1Preconditioner& H1Preconditioner::operator=(H1Preconditioner&&) noexcept = default;

void H1Preconditioner::solve(std::span<const double> g, std::span<double> out) const {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::Map<const Eigen::VectorXd> gv(g.data(), n);
  Eigen::Map<Eigen::VectorXd> ov(out.data(), n);
  ov = impl_->ldlt.solve(gv);
}

double H1Preconditioner::inner(std::span<const double> a, std::span<const double> b) const {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::Map<const Eigen::VectorXd> av(a.data(), n), bv(b.data(), n);
  return av.dot(impl_->H * bv);
}

}  // namespace pqs
