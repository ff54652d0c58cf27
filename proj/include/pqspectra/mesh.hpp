#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace pqs {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct QuadraturePoint {
  Point point;
  double weight = 0.0;
  int node = -1;  ///< nodal-quadrature points coincide with mesh nodes
};

/// Constant gradients of the three P1 hat functions on one triangle.
struct CellBasis {
  std::array<std::array<double, 2>, 3> grad{};
  double area = 0.0;
};

enum class Axis { X, Y };

/// Triangulated axis-aligned rectangle [0,lx] x [0,ly] with first-order nodal basis.
///
/// Nodes are numbered row-major (index = j*(nx+1) + i). Every grid cell is split
/// into two right triangles whose diagonal points towards the domain centre, so
/// the triangulation is mirror-symmetric whenever nx and ny are even.
///
/// Quadrature:
///  - gradient terms: one point per triangle (exact, gradients are cellwise constant);
///  - volume terms: vertex rule, i.e. lumped nodal weights summing to |Omega|;
///  - boundary terms: trapezoidal rule on boundary facets, lumped to boundary nodes.
///
/// Immutable after construction.
class MeshDomain {
 public:
  double lx() const noexcept { return lx_; }
  double ly() const noexcept { return ly_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }

  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::size_t num_cells() const noexcept { return cells_.size(); }
  double area() const noexcept { return lx_ * ly_; }
  double perimeter() const noexcept { return 2.0 * (lx_ + ly_); }

  std::span<const Point> nodes() const noexcept { return nodes_; }
  std::span<const std::array<int, 3>> cells() const noexcept { return cells_; }
  std::span<const CellBasis> cell_basis() const noexcept { return basis_; }
  std::span<const std::array<int, 2>> boundary_facets() const noexcept { return facets_; }
  std::span<const int> facet_cell() const noexcept { return facet_cell_; }

  /// Nodal (lumped) volume quadrature: one point per node, in node order.
  std::span<const QuadraturePoint> volume_quadrature() const noexcept { return volume_quad_; }
  /// Lumped boundary quadrature: one point per boundary node.
  std::span<const QuadraturePoint> boundary_quadrature() const noexcept { return boundary_quad_; }
  /// Cell-centroid quadrature used for gradient terms.
  std::span<const QuadraturePoint> gradient_quadrature() const noexcept { return gradient_quad_; }

  /// Volume weight per node (same data as volume_quadrature()).
  std::span<const double> node_weights() const noexcept { return node_weight_; }
  /// Boundary weight per node; zero for interior nodes.
  std::span<const double> node_boundary_weights() const noexcept { return node_bweight_; }
  bool is_boundary_node(int node) const noexcept { return node_bweight_[static_cast<std::size_t>(node)] > 0.0; }

  /// Node-to-cell incidence in CSR form: cells touching node i are
  /// incident_cells()[incident_offsets()[i] .. incident_offsets()[i+1]), paired
  /// with the local vertex slot in incident_slots().
  std::span<const int> incident_offsets() const noexcept { return inc_offsets_; }
  std::span<const int> incident_cells() const noexcept { return inc_cells_; }
  std::span<const int> incident_slots() const noexcept { return inc_slots_; }

  /// Node permutation of the mirror map about the centre line orthogonal to
  /// `axis`, or nullopt when the triangulation is not invariant under it.
  std::optional<std::vector<int>> reflection(Axis axis) const;

  int node_index(int i, int j) const noexcept { return j * (nx_ + 1) + i; }

  /// True when both meshes describe the same discretization.
  bool same_as(const MeshDomain& other) const noexcept;

  friend std::shared_ptr<const MeshDomain> build_rectangle_mesh(double, double, int, int);

 private:
  MeshDomain() = default;

  double lx_ = 0.0, ly_ = 0.0;
  int nx_ = 0, ny_ = 0;
  std::vector<Point> nodes_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<CellBasis> basis_;
  std::vector<std::array<int, 2>> facets_;
  std::vector<int> facet_cell_;
  std::vector<QuadraturePoint> volume_quad_, boundary_quad_, gradient_quad_;
  std::vector<double> node_weight_, node_bweight_;
  std::vector<int> inc_offsets_, inc_cells_, inc_slots_;
};

using MeshPtr = std::shared_ptr<const MeshDomain>;

/// Conforming P1 mesh of [0,lx]x[0,ly] with nx*ny grid cells (2*nx*ny triangles).
/// Throws ValidationError for non-positive lengths or nx, ny < 2.
MeshPtr build_rectangle_mesh(double lx, double ly, int nx, int ny);

/// Sum of w_i f(x_i) over the volume quadrature. f must hold one finite sample
/// per volume quadrature point; a non-finite sample raises ValidationError naming it.
double integrate_volume(const MeshDomain& m, std::span<const double> f);

/// Sum of w_j g(s_j) over the boundary quadrature; same contract as integrate_volume.
double integrate_boundary(const MeshDomain& m, std::span<const double> g);

/// Samples a callable at the volume / boundary quadrature points.
template <class F>
std::vector<double> sample_volume(const MeshDomain& m, F&& f) {
  std::vector<double> out;
  out.reserve(m.volume_quadrature().size());
  for (const auto& qp : m.volume_quadrature()) out.push_back(f(qp.point.x, qp.point.y));
  return out;
}

template <class F>
std::vector<double> sample_boundary(const MeshDomain& m, F&& f) {
  std::vector<double> out;
  out.reserve(m.boundary_quadrature().size());
  for (const auto& qp : m.boundary_quadrature()) out.push_back(f(qp.point.x, qp.point.y));
  return out;
}

/// Field dump v1: header `pq-field v1 nx ny lx ly`, then one nodal value per line, row-major.
void write_field(std::ostream& os, const MeshDomain& m, std::span<const double> values);

struct FieldDump {
  int nx = 0, ny = 0;
  double lx = 0.0, ly = 0.0;
  std::vector<double> values;
};

FieldDump read_field(std::istream& is);

}  // namespace pqs
