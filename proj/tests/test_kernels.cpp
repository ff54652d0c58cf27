#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <random>

#include "pqspectra/energy.hpp"
#include "pqspectra/kernels.hpp"
#include "support.hpp"

using namespace pqs;
using kernels::Exec;

namespace {

kernels::PowerFunctional functional(const ProblemConfig& cfg) {
  kernels::PowerFunctional pf;
  pf.mesh = cfg.mesh;
  pf.epsilon = 1e-8;
  pf.gradient_terms.push_back({{cfg.p.cell_values().begin(), cfg.p.cell_values().end()}, 1.0, {}});
  pf.gradient_terms.push_back({{cfg.q.cell_values().begin(), cfg.q.cell_values().end()}, 0.5, {}});
  kernels::NodalTerm bd;
  const auto w = cfg.mesh->node_boundary_weights();
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0) {
      bd.nodes.push_back(int(i));
      bd.exponent.push_back(cfg.p[i]);
      bd.coefficient.push_back(w[i]);
    }
  pf.nodal_terms.push_back(std::move(bd));
  kernels::prepare(pf);
  return pf;
}

ProblemConfig variable_fixture(int n) {
  return pqs::testing::make_config({"1.6 + 0.5*x", "3 + 0.5*y*x", "1.5", "1", "1", 1.0, n});
}

class ThreadCount {
 public:
  explicit ThreadCount(int n) : saved_(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved_); }

 private:
  int saved_;
};

}  // namespace

TEST(Kernels, ParallelMatchesSerial) {
  const auto cfg = variable_fixture(48);
  const auto pf = functional(cfg);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 5; ++k) {
    const auto u = random_cosine_field(cfg.mesh, rng, 4, true);
    std::vector<double> gs(u.size()), gp(u.size());
    const double es = kernels::value_and_gradient(pf, u.values, gs, Exec::Serial);
    const double ep = kernels::value_and_gradient(pf, u.values, gp, Exec::Parallel);
    EXPECT_NEAR(es, ep, 1e-12 * std::abs(es));
    for (std::size_t i = 0; i < gs.size(); ++i) EXPECT_NEAR(gs[i], gp[i], 1e-12 * (1 + std::abs(gs[i])));
    EXPECT_NEAR(kernels::value(pf, u.values, Exec::Serial), es, 1e-12 * std::abs(es));
    const double ss = kernels::sum(u.values, Exec::Serial);
    EXPECT_NEAR(ss, kernels::sum(u.values, Exec::Parallel), 1e-12 * std::abs(ss));
  }
}

TEST(Kernels, ParallelIndependentOfThreadCount) {
  const auto cfg = variable_fixture(64);
  const auto pf = functional(cfg);
  std::mt19937_64 rng(2);
  const auto u = random_cosine_field(cfg.mesh, rng, 5, true);
  std::vector<double> ref(u.size());
  double e_ref = 0.0;
  {
    ThreadCount t(1);
    e_ref = kernels::value_and_gradient(pf, u.values, ref, Exec::Parallel);
  }
  for (int threads : {2, 3, 4, 7}) {
    ThreadCount t(threads);
    std::vector<double> g(u.size());
    const double e = kernels::value_and_gradient(pf, u.values, g, Exec::Parallel);
    EXPECT_EQ(e, e_ref) << threads;
    EXPECT_EQ(g, ref) << threads;
  }
}

TEST(Kernels, CellGradientsOfLinearFunction) {
  const auto m = build_rectangle_mesh(2, 1, 7, 5);
  const auto u = DiscreteFunction::interpolate(m, [](double x, double y) { return 3 * x - 2 * y + 1; });
  for (Exec e : {Exec::Serial, Exec::Parallel}) {
    std::vector<std::array<double, 2>> g(m->num_cells());
    kernels::cell_gradients(*m, u.values, g, e);
    for (const auto& v : g) {
      EXPECT_NEAR(v[0], 3.0, 1e-12);
      EXPECT_NEAR(v[1], -2.0, 1e-12);
    }
  }
}

TEST(Kernels, ModularSamples) {
  kernels::ModularSamples s;
  for (int i = 0; i < 5000; ++i) s.push(1.0 + 0.001 * i, 2.0 + 0.0003 * i, 0.0002);
  EXPECT_NEAR(kernels::modular(s, 1.3, Exec::Serial), kernels::modular(s, 1.3, Exec::Parallel), 1e-12);
  kernels::ModularSamples one;
  one.push(2.0, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(kernels::modular(one, 4.0), 0.25);
}

TEST(Kernels, EnergyEpsilonOffset) {
  // Zero gradient contributes nothing even with eps > 0.
  auto cfg = variable_fixture(8);
  const auto pf = functional(cfg);
  const auto zero = DiscreteFunction::zeros(cfg.mesh);
  EXPECT_EQ(kernels::value(pf, zero.values), 0.0);
}
