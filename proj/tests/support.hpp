#pragma once

#include <random>
#include <string>

#include "pqspectra/fields.hpp"
#include "pqspectra/spaces.hpp"

namespace pqs::testing {

struct Data {
  std::string p = "2", q = "3", r = "1.5", alpha = "1", beta = "1";
  double lambda = 1.0;
  int n = 16;
  double lx = 1.0, ly = 1.0;
};

inline ProblemConfig make_config(const Data& d) {
  ProblemConfig c;
  c.mesh = build_rectangle_mesh(d.lx, d.ly, d.n, d.n);
  c.p = make_exponent(c.mesh, Expression::parse(d.p));
  c.q = make_exponent(c.mesh, Expression::parse(d.q));
  c.r = make_exponent(c.mesh, Expression::parse(d.r));
  c.alpha = make_volume_weight(c.mesh, Expression::parse(d.alpha));
  c.beta1 = make_boundary_weight(c.mesh, Expression::parse(d.beta));
  c.beta2 = make_boundary_weight(c.mesh, Expression::parse(d.beta));
  c.lambda = d.lambda;
  return c;
}

inline ProblemConfig sublinear_a(int n = 16) { return make_config({"2", "3", "1.5", "1", "1", 1.0, n}); }

/// p = 2.5, q = r = 4, Neumann.
inline ProblemConfig homogeneous_a(int n = 16) { return make_config({"2.5", "4", "4", "1", "0", 1.0, n}); }

/// q = r = 3 < p = 4, Neumann.
inline ProblemConfig homogeneous_b(int n = 16) { return make_config({"4", "3", "3", "1", "0", 1.0, n}); }

inline ProblemConfig superlinear_c(int n = 16) { return make_config({"2", "2.5", "4", "1", "1", 1.0, n}); }

/// r = 1.5 on a disc around the centre, 2.5 away from it.
inline ProblemConfig small_lambda_b(int n = 16) {
  return make_config({"2", "3", "1.5 + min(1, max(0, (hypot(x-0.5,y-0.5)-0.2)/0.1))", "1", "1", 1.0, n});
}

inline std::vector<double> random_nodal(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace pqs::testing
