#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "pqspectra/error.hpp"
#include "pqspectra/mesh.hpp"

using namespace pqs;

namespace {

double total(std::span<const QuadraturePoint> q) {
  double s = 0.0;
  for (const auto& p : q) s += p.weight;
  return s;
}

}  // namespace

TEST(Mesh, UnitSquareGeometry) {
  const auto m = build_rectangle_mesh(1, 1, 2, 2);
  EXPECT_NEAR(total(m->volume_quadrature()), 1.0, 1e-15);
  EXPECT_NEAR(total(m->boundary_quadrature()), 4.0, 1e-15);
  EXPECT_EQ(m->num_nodes(), 9u);
  EXPECT_EQ(m->num_cells(), 8u);
}

TEST(Mesh, RectangleGeometry) {
  const auto m = build_rectangle_mesh(2, 1, 4, 2);
  EXPECT_NEAR(total(m->volume_quadrature()), 2.0, 1e-15);
  EXPECT_NEAR(total(m->boundary_quadrature()), 6.0, 1e-15);
}

TEST(Mesh, FineWeightsSumToArea) {
  const auto m = build_rectangle_mesh(1, 1, 32, 32);
  EXPECT_NEAR(total(m->volume_quadrature()), 1.0, 1e-12);
  double cells = 0.0;
  for (const auto& b : m->cell_basis()) cells += b.area;
  EXPECT_NEAR(cells, 1.0, 1e-12);
}

TEST(Mesh, WeightsPositive) {
  const auto m = build_rectangle_mesh(1.5, 0.7, 6, 5);
  for (const auto& q : m->volume_quadrature()) EXPECT_GT(q.weight, 0.0);
  for (const auto& q : m->boundary_quadrature()) EXPECT_GT(q.weight, 0.0);
  for (const auto& q : m->gradient_quadrature()) EXPECT_GT(q.weight, 0.0);
}

TEST(Mesh, BoundaryFacetsBelongToOneCell) {
  const auto m = build_rectangle_mesh(1, 1, 5, 4);
  ASSERT_EQ(m->boundary_facets().size(), 2u * (5 + 4));
  for (std::size_t f = 0; f < m->boundary_facets().size(); ++f) {
    const auto [a, b] = m->boundary_facets()[f];
    int owners = 0;
    for (const auto& c : m->cells()) {
      const std::set<int> s(c.begin(), c.end());
      owners += s.count(a) && s.count(b);
    }
    EXPECT_EQ(owners, 1);
    const auto& c = m->cells()[static_cast<std::size_t>(m->facet_cell()[f])];
    EXPECT_TRUE(std::find(c.begin(), c.end(), a) != c.end());
  }
}

TEST(Mesh, BasisGradientsSumToZero) {
  const auto m = build_rectangle_mesh(1, 2, 3, 3);
  for (const auto& b : m->cell_basis()) {
    EXPECT_NEAR(b.grad[0][0] + b.grad[1][0] + b.grad[2][0], 0.0, 1e-12);
    EXPECT_NEAR(b.grad[0][1] + b.grad[1][1] + b.grad[2][1], 0.0, 1e-12);
  }
}

TEST(Mesh, RejectsBadParameters) {
  EXPECT_THROW(build_rectangle_mesh(1, 1, 1, 4), ValidationError);
  EXPECT_THROW(build_rectangle_mesh(1, 1, 4, 1), ValidationError);
  EXPECT_THROW(build_rectangle_mesh(0, 1, 4, 4), ValidationError);
  EXPECT_THROW(build_rectangle_mesh(1, -2, 4, 4), ValidationError);
}

TEST(Integrate, Constants) {
  const auto m = build_rectangle_mesh(1, 1, 8, 8);
  EXPECT_NEAR(integrate_volume(*m, sample_volume(*m, [](double, double) { return 1.0; })), 1.0, 1e-14);
  EXPECT_NEAR(integrate_volume(*m, sample_volume(*m, [](double, double) { return 3.5; })), 3.5, 1e-14);
  EXPECT_NEAR(integrate_boundary(*m, sample_boundary(*m, [](double, double) { return 1.0; })), 4.0, 1e-14);
  EXPECT_EQ(integrate_boundary(*m, sample_boundary(*m, [](double, double) { return 0.0; })), 0.0);
  EXPECT_NEAR(integrate_boundary(*m, sample_boundary(*m, [](double, double) { return 0.3; })), 1.2, 1e-14);
}

TEST(Integrate, LinearFunction) {
  const auto m = build_rectangle_mesh(1, 1, 32, 32);
  EXPECT_NEAR(integrate_volume(*m, sample_volume(*m, [](double x, double) { return x; })), 0.5, 1e-10);
}

TEST(Integrate, NonFiniteSampleNamesPoint) {
  const auto m = build_rectangle_mesh(1, 1, 4, 4);
  auto f = sample_volume(*m, [](double, double) { return 1.0; });
  f[7] = std::nan("");
  try {
    integrate_volume(*m, f);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("7"), std::string::npos) << e.what();
  }
  auto g = sample_boundary(*m, [](double, double) { return 1.0; });
  g[2] = INFINITY;
  EXPECT_THROW(integrate_boundary(*m, g), ValidationError);
}

TEST(Integrate, Linearity) {
  const auto m = build_rectangle_mesh(1, 1, 16, 16);
  const auto f = sample_volume(*m, [](double x, double y) { return std::sin(3 * x) + y * y; });
  const auto g = sample_volume(*m, [](double x, double y) { return std::exp(x - y); });
  std::vector<double> h(f.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = 2.5 * f[i] - 0.75 * g[i];
  EXPECT_NEAR(integrate_volume(*m, h), 2.5 * integrate_volume(*m, f) - 0.75 * integrate_volume(*m, g), 1e-14);
}

TEST(Integrate, RefinementConverges) {
  const auto f = [](double x, double y) { return std::sin(2 * x) * std::exp(y); };
  double prev_diff = INFINITY;
  for (int n : {4, 8, 16, 32}) {
    const auto a = build_rectangle_mesh(1, 1, n, n);
    const auto b = build_rectangle_mesh(1, 1, 2 * n, 2 * n);
    const double diff = std::abs(integrate_volume(*a, sample_volume(*a, f)) - integrate_volume(*b, sample_volume(*b, f)));
    EXPECT_LT(diff, prev_diff);
    prev_diff = diff;
  }
}

TEST(Mesh, ReflectionIsInvolution) {
  const auto m = build_rectangle_mesh(2, 1, 8, 6);
  for (Axis a : {Axis::X, Axis::Y}) {
    const auto perm = m->reflection(a);
    ASSERT_TRUE(perm.has_value());
    for (std::size_t i = 0; i < perm->size(); ++i) EXPECT_EQ((*perm)[static_cast<std::size_t>((*perm)[i])], int(i));
  }
  const auto odd = build_rectangle_mesh(1, 1, 5, 4);
  EXPECT_FALSE(odd->reflection(Axis::X).has_value());
}

TEST(FieldDump, RoundTripWithComment) {
  const auto m = build_rectangle_mesh(1.5, 1, 3, 2);
  std::vector<double> v(m->num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * double(i) - 1.0 / 3.0;
  std::stringstream ss;
  ss << "# config_hash=abc\n";
  write_field(ss, *m, v);
  EXPECT_NE(ss.str().find("pq-field v1 3 2 1.5 1"), std::string::npos);
  const FieldDump d = read_field(ss);
  EXPECT_EQ(d.nx, 3);
  EXPECT_EQ(d.ny, 2);
  EXPECT_EQ(d.values, v);
}

TEST(FieldDump, RejectsTruncated) {
  std::stringstream ss("pq-field v1 2 2 1 1\n0\n1\n");
  EXPECT_THROW(read_field(ss), ValidationError);
}
