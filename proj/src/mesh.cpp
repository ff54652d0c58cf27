#include "pqspectra/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "pqspectra/error.hpp"
#include "pqspectra/format.hpp"

namespace pqs {

namespace {

CellBasis make_basis(const Point& a, const Point& b, const Point& c) {
  const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  CellBasis cb;
  cb.area = 0.5 * std::abs(det);
  cb.grad[0] = {(b.y - c.y) / det, (c.x - b.x) / det};
  cb.grad[1] = {(c.y - a.y) / det, (a.x - c.x) / det};
  cb.grad[2] = {(a.y - b.y) / det, (b.x - a.x) / det};
  return cb;
}

std::array<int, 3> sorted(std::array<int, 3> t) {
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace

MeshPtr build_rectangle_mesh(double lx, double ly, int nx, int ny) {
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
    throw ValidationError("build_rectangle_mesh: side lengths must be positive and finite");
  if (nx < 2 || ny < 2) throw ValidationError("build_rectangle_mesh: nx and ny must be >= 2");

  auto mesh = std::shared_ptr<MeshDomain>(new MeshDomain());
  MeshDomain& m = *mesh;
  m.lx_ = lx;
  m.ly_ = ly;
  m.nx_ = nx;
  m.ny_ = ny;

  const double hx = lx / nx;
  const double hy = ly / ny;
  m.nodes_.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.nodes_.push_back({i == nx ? lx : i * hx, j == ny ? ly : j * hy});

  m.cells_.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int n00 = m.node_index(i, j), n10 = m.node_index(i + 1, j);
      const int n01 = m.node_index(i, j + 1), n11 = m.node_index(i + 1, j + 1);
      const bool left = 2 * i + 1 < nx;
      const bool bottom = 2 * j + 1 < ny;
      if (left == bottom) {
        m.cells_.push_back({n00, n10, n11});
        m.cells_.push_back({n00, n11, n01});
      } else {
        m.cells_.push_back({n00, n10, n01});
        m.cells_.push_back({n10, n11, n01});
      }
    }
  }

  const std::size_t nn = m.nodes_.size();
  m.node_weight_.assign(nn, 0.0);
  m.basis_.reserve(m.cells_.size());
  m.gradient_quad_.reserve(m.cells_.size());
  for (const auto& c : m.cells_) {
    const Point& a = m.nodes_[static_cast<std::size_t>(c[0])];
    const Point& b = m.nodes_[static_cast<std::size_t>(c[1])];
    const Point& d = m.nodes_[static_cast<std::size_t>(c[2])];
    CellBasis cb = make_basis(a, b, d);
    for (int v : c) m.node_weight_[static_cast<std::size_t>(v)] += cb.area / 3.0;
    m.gradient_quad_.push_back({{(a.x + b.x + d.x) / 3.0, (a.y + b.y + d.y) / 3.0}, cb.area, -1});
    m.basis_.push_back(cb);
  }

  // Boundary facets, counter-clockwise.
  for (int i = 0; i < nx; ++i) m.facets_.push_back({m.node_index(i, 0), m.node_index(i + 1, 0)});
  for (int j = 0; j < ny; ++j) m.facets_.push_back({m.node_index(nx, j), m.node_index(nx, j + 1)});
  for (int i = nx; i > 0; --i) m.facets_.push_back({m.node_index(i, ny), m.node_index(i - 1, ny)});
  for (int j = ny; j > 0; --j) m.facets_.push_back({m.node_index(0, j), m.node_index(0, j - 1)});

  std::map<std::pair<int, int>, std::vector<int>> edge_cells;
  for (std::size_t c = 0; c < m.cells_.size(); ++c) {
    const auto& t = m.cells_[c];
    for (int k = 0; k < 3; ++k) {
      int a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
      edge_cells[{std::min(a, b), std::max(a, b)}].push_back(static_cast<int>(c));
    }
  }
  m.node_bweight_.assign(nn, 0.0);
  for (const auto& f : m.facets_) {
    const auto& owners = edge_cells[{std::min(f[0], f[1]), std::max(f[0], f[1])}];
    if (owners.size() != 1) throw Error("build_rectangle_mesh: boundary facet not owned by exactly one cell");
    m.facet_cell_.push_back(owners.front());
    const Point& a = m.nodes_[static_cast<std::size_t>(f[0])];
    const Point& b = m.nodes_[static_cast<std::size_t>(f[1])];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    m.node_bweight_[static_cast<std::size_t>(f[0])] += 0.5 * len;
    m.node_bweight_[static_cast<std::size_t>(f[1])] += 0.5 * len;
  }

  m.volume_quad_.reserve(nn);
  for (std::size_t i = 0; i < nn; ++i)
    m.volume_quad_.push_back({m.nodes_[i], m.node_weight_[i], static_cast<int>(i)});
  for (std::size_t i = 0; i < nn; ++i)
    if (m.node_bweight_[i] > 0.0)
      m.boundary_quad_.push_back({m.nodes_[i], m.node_bweight_[i], static_cast<int>(i)});

  m.inc_offsets_.assign(nn + 1, 0);
  for (const auto& c : m.cells_)
    for (int v : c) ++m.inc_offsets_[static_cast<std::size_t>(v) + 1];
  for (std::size_t i = 0; i < nn; ++i) m.inc_offsets_[i + 1] += m.inc_offsets_[i];
  m.inc_cells_.assign(static_cast<std::size_t>(m.inc_offsets_.back()), 0);
  m.inc_slots_.assign(m.inc_cells_.size(), 0);
  std::vector<int> fill(m.inc_offsets_.begin(), m.inc_offsets_.end() - 1);
  for (std::size_t c = 0; c < m.cells_.size(); ++c) {
    for (int k = 0; k < 3; ++k) {
      const auto v = static_cast<std::size_t>(m.cells_[c][static_cast<std::size_t>(k)]);
      const auto at = static_cast<std::size_t>(fill[v]++);
      m.inc_cells_[at] = static_cast<int>(c);
      m.inc_slots_[at] = k;
    }
  }
  return mesh;
}

std::optional<std::vector<int>> MeshDomain::reflection(Axis axis) const {
  std::vector<int> perm(num_nodes());
  for (int j = 0; j <= ny_; ++j)
    for (int i = 0; i <= nx_; ++i)
      perm[static_cast<std::size_t>(node_index(i, j))] =
          axis == Axis::X ? node_index(nx_ - i, j) : node_index(i, ny_ - j);

  std::set<std::array<int, 3>> tris;
  for (const auto& c : cells_) tris.insert(sorted(c));
  for (const auto& c : cells_) {
    std::array<int, 3> img{perm[static_cast<std::size_t>(c[0])], perm[static_cast<std::size_t>(c[1])],
                           perm[static_cast<std::size_t>(c[2])]};
    if (!tris.contains(sorted(img))) return std::nullopt;
  }
  return perm;
}

bool MeshDomain::same_as(const MeshDomain& other) const noexcept {
  return this == &other ||
         (nx_ == other.nx_ && ny_ == other.ny_ && lx_ == other.lx_ && ly_ == other.ly_);
}

namespace {

double weighted_sum(std::span<const QuadraturePoint> quad, std::span<const double> f, const char* what) {
  if (f.size() != quad.size()) {
    std::ostringstream os;
    os << what << ": expected " << quad.size() << " samples, got " << f.size();
    throw MeshMismatch(os.str());
  }
  double s = 0.0;
  for (std::size_t i = 0; i < quad.size(); ++i) {
    if (!std::isfinite(f[i])) {
      std::ostringstream os;
      os << what << ": non-finite sample at quadrature point " << i << " (" << quad[i].point.x << ", "
         << quad[i].point.y << ")";
      throw ValidationError(os.str());
    }
    s += quad[i].weight * f[i];
  }
  return s;
}

}  // namespace

double integrate_volume(const MeshDomain& m, std::span<const double> f) {
  return weighted_sum(m.volume_quadrature(), f, "integrate_volume");
}

double integrate_boundary(const MeshDomain& m, std::span<const double> g) {
  return weighted_sum(m.boundary_quadrature(), g, "integrate_boundary");
}

void write_field(std::ostream& os, const MeshDomain& m, std::span<const double> values) {
  if (values.size() != m.num_nodes()) throw MeshMismatch("write_field: value count does not match mesh");
  os << "pq-field v1 " << m.nx() << ' ' << m.ny() << ' ' << format_double(m.lx()) << ' '
     << format_double(m.ly()) << '\n';
  for (double v : values) os << format_double(v) << '\n';
}

FieldDump read_field(std::istream& is) {
  FieldDump d;
  std::string magic, version;
  // Leading '#' lines carry provenance comments.
  while (is >> std::ws && is.peek() == '#') {
    std::string skip;
    std::getline(is, skip);
  }
  if (!(is >> magic >> version >> d.nx >> d.ny >> d.lx >> d.ly) || magic != "pq-field" || version != "v1")
    throw ValidationError("read_field: missing or malformed 'pq-field v1 nx ny lx ly' header");
  const auto count = static_cast<std::size_t>((d.nx + 1) * (d.ny + 1));
  d.values.reserve(count);
  double v = 0.0;
  while (d.values.size() < count && is >> v) d.values.push_back(v);
  if (d.values.size() != count) throw ValidationError("read_field: truncated value list");
  return d;
}

}  // namespace pqs
