#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pqspectra/error.hpp"
#include "pqspectra/spaces.hpp"
#include "support.hpp"

using namespace pqs;

namespace {

MeshPtr unit(int n = 8) { return build_rectangle_mesh(1, 1, n, n); }

}  // namespace

TEST(Modular, Constants) {
  const auto m = unit();
  EXPECT_NEAR(lebesgue_modular(DiscreteFunction::constant(m, 3), constant_exponent(m, 2)), 9.0, 1e-13);
  EXPECT_EQ(lebesgue_modular(DiscreteFunction::zeros(m), constant_exponent(m, 2)), 0.0);
}

TEST(Modular, VariableExponentRefines) {
  const double exact = 4.0 / std::log(2.0);
  const auto m = build_rectangle_mesh(1, 1, 1024, 2);
  const double v = lebesgue_modular(DiscreteFunction::constant(m, 2), make_exponent(m, Expression::parse("2 + x")));
  EXPECT_NEAR(v, exact, 1e-6);
}

TEST(Modular, MeshMismatch) {
  EXPECT_THROW(lebesgue_modular(DiscreteFunction::constant(unit(4), 1), constant_exponent(unit(5), 2)), MeshMismatch);
  EXPECT_THROW(DiscreteFunction(unit(4), std::vector<double>(3, 0.0)), MeshMismatch);
  EXPECT_THROW(DiscreteFunction(unit(2), std::vector<double>(9, NAN)), ValidationError);
}

TEST(Luxemburg, Examples) {
  const auto m = unit();
  EXPECT_NEAR(luxemburg_norm(DiscreteFunction::constant(m, 3), constant_exponent(m, 2)), 3.0, 1e-11);
  EXPECT_NEAR(luxemburg_norm(DiscreteFunction::constant(m, 1), make_exponent(m, Expression::parse("1.5 + x*y"))), 1.0,
              1e-11);
  EXPECT_EQ(luxemburg_norm(DiscreteFunction::zeros(m), constant_exponent(m, 2)), 0.0);
  const auto r = build_rectangle_mesh(2, 1.5, 6, 4);
  EXPECT_NEAR(luxemburg_norm(DiscreteFunction::constant(r, 0.7), constant_exponent(r, 3)), 0.7 * std::cbrt(3.0), 1e-11);
}

TEST(Luxemburg, Homogeneity) {
  const auto m = unit(12);
  std::mt19937_64 rng(3);
  const auto p = make_exponent(m, Expression::parse("1.5 + 2*x*y"));
  for (int k = 0; k < 20; ++k) {
    const DiscreteFunction u(m, pqs::testing::random_nodal(m->num_nodes(), rng));
    const double n = luxemburg_norm(u, p);
    for (double c : {-3.0, 0.01, 250.0}) EXPECT_NEAR(luxemburg_norm(u.scaled(c), p), std::abs(c) * n, 1e-10 * std::abs(c) * n);
  }
}

TEST(SobolevBeta, Examples) {
  const auto m = unit();
  const auto one = unit_boundary_weight(m);
  const auto p2 = constant_exponent(m, 2);
  EXPECT_NEAR(sobolev_beta_modular(DiscreteFunction::constant(m, 1), p2, one), 4.0, 1e-13);
  EXPECT_EQ(sobolev_beta_modular(DiscreteFunction::zeros(m), p2, one), 0.0);
  EXPECT_NEAR(sobolev_beta_norm(DiscreteFunction::constant(m, 1), p2, one), 2.0, 1e-11);
  EXPECT_EQ(sobolev_beta_norm(DiscreteFunction::zeros(m), p2, one), 0.0);
}

TEST(SobolevBeta, LinearFunctionRefines) {
  const auto m = build_rectangle_mesh(1, 1, 1024, 2);
  const auto u = DiscreteFunction::interpolate(m, [](double x, double) { return x; });
  EXPECT_NEAR(sobolev_beta_modular(u, constant_exponent(m, 2), unit_boundary_weight(m)), 8.0 / 3.0, 1e-6);
}

TEST(SobolevBeta, RejectsNeumannWeight) {
  const auto m = unit();
  const auto zero = make_boundary_weight(m, Expression::parse("0"));
  EXPECT_THROW(sobolev_beta_modular(DiscreteFunction::constant(m, 1), constant_exponent(m, 2), zero), ValidationError);
}

TEST(SobolevBeta, NormModularRelations) {
  const auto m = unit(12);
  const auto beta = make_boundary_weight(m, Expression::parse("1 + 0.5*x"));
  const auto p = make_exponent(m, Expression::parse("1.6 + 1.8*x*y"));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> scale(-3, 3);
  for (int k = 0; k < 200; ++k) {
    DiscreteFunction u(m, pqs::testing::random_nodal(m->num_nodes(), rng));
    u = u.scaled(std::pow(10.0, scale(rng)));
    const double n = sobolev_beta_norm(u, p, beta);
    const double rho = sobolev_beta_modular(u, p, beta);
    if (n <= 1.0) {
      EXPECT_LE(std::pow(n, p.sup()), rho * (1 + 1e-10));
      EXPECT_LE(rho, std::pow(n, p.inf()) * (1 + 1e-10));
    } else {
      EXPECT_LE(std::pow(n, p.inf()), rho * (1 + 1e-10));
      EXPECT_LE(rho, std::pow(n, p.sup()) * (1 + 1e-10));
    }
    EXPECT_EQ(n < 1.0, rho < 1.0);
  }
}

TEST(SobolevBeta, TriangleInequality) {
  const auto m = unit(10);
  const auto one = unit_boundary_weight(m);
  const auto p = make_exponent(m, Expression::parse("2 + sin(3*x)"));
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const DiscreteFunction u(m, pqs::testing::random_nodal(m->num_nodes(), rng));
    const DiscreteFunction v(m, pqs::testing::random_nodal(m->num_nodes(), rng, -5, 5));
    std::vector<double> s(u.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = u[i] + v[i];
    const DiscreteFunction w(m, s);
    EXPECT_LE(sobolev_beta_norm(w, p, one), (sobolev_beta_norm(u, p, one) + sobolev_beta_norm(v, p, one)) * (1 + 1e-10));
    EXPECT_LE(luxemburg_norm(w, p), (luxemburg_norm(u, p) + luxemburg_norm(v, p)) * (1 + 1e-10));
  }
}

TEST(M1Norm, MatchesUnitBoundaryNorm) {
  const auto m = unit();
  const auto M = constant_exponent(m, 3);
  const auto u = DiscreteFunction::interpolate(m, [](double x, double y) { return x - y * y; });
  EXPECT_DOUBLE_EQ(m1_norm(u, M), sobolev_beta_norm(u, M, unit_boundary_weight(m)));
}

TEST(Holder, Examples) {
  const auto m = unit();
  const auto p = constant_exponent(m, 2);
  const auto h = holder_pair_bound(DiscreteFunction::constant(m, 1), DiscreteFunction::constant(m, 1), p);
  EXPECT_NEAR(h.lhs, 1.0, 1e-13);
  EXPECT_NEAR(h.rhs, 2.0, 1e-11);
  const auto z = holder_pair_bound(DiscreteFunction::zeros(m), DiscreteFunction::constant(m, 1), p);
  EXPECT_EQ(z.lhs, 0.0);
  EXPECT_EQ(z.rhs, 0.0);
}

TEST(Holder, RandomPairs) {
  const auto m = build_rectangle_mesh(1, 1, 16, 16);
  const auto p = make_exponent(m, Expression::parse("1.2 + 3*x*y"));
  std::mt19937_64 rng(17);
  for (int k = 0; k < 200; ++k) {
    const DiscreteFunction u(m, pqs::testing::random_nodal(m->num_nodes(), rng));
    const DiscreteFunction v(m, pqs::testing::random_nodal(m->num_nodes(), rng));
    const auto h = holder_pair_bound(u, v, p);
    EXPECT_LE(h.lhs, h.rhs);
  }
}

TEST(Luxemburg, BracketExpandsForLargeModular) {
  const auto m = unit(4);
  const auto p = constant_exponent(m, 4);
  EXPECT_NEAR(luxemburg_norm(DiscreteFunction::constant(m, 1e6), p), 1e6, 1e-6);
  EXPECT_NEAR(luxemburg_norm(DiscreteFunction::constant(m, 1e-9), p), 1e-9, 1e-20);
}
