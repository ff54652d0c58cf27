#include <benchmark/benchmark.h>

#include <random>

#include "pqspectra/energy.hpp"

namespace {

pqs::ProblemConfig fixture(int n) {
  using namespace pqs;
  ProblemConfig cfg;
  cfg.mesh = build_rectangle_mesh(1.0, 1.0, n, n);
  cfg.p = make_exponent(cfg.mesh, Expression::parse("2 + 0.5*x"));
  cfg.q = make_exponent(cfg.mesh, Expression::parse("3 + 0.5*y"));
  cfg.r = constant_exponent(cfg.mesh, 1.5);
  cfg.alpha = make_volume_weight(cfg.mesh, Expression::parse("1"));
  cfg.beta1 = make_boundary_weight(cfg.mesh, Expression::parse("1"));
  cfg.beta2 = make_boundary_weight(cfg.mesh, Expression::parse("1"));
  return cfg;
}

void run(benchmark::State& state, pqs::kernels::Exec exec) {
  const auto cfg = fixture(static_cast<int>(state.range(0)));
  pqs::EnergyFunctional f(cfg);
  std::mt19937_64 rng(7);
  const auto u = pqs::random_cosine_field(cfg.mesh, rng, 3, true);
  std::vector<double> g(u.size());
  pqs::kernels::PowerFunctional pf;
  pf.mesh = cfg.mesh;
  pf.epsilon = cfg.epsilon_reg;
  pf.gradient_terms.push_back({{cfg.p.cell_values().begin(), cfg.p.cell_values().end()}, 1.0, {}});
  pf.gradient_terms.push_back({{cfg.q.cell_values().begin(), cfg.q.cell_values().end()}, 1.0, {}});
  pqs::kernels::prepare(pf);
  for (auto _ : state) benchmark::DoNotOptimize(pqs::kernels::value_and_gradient(pf, u.values, g, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.mesh->num_cells()));
}

void BM_GradientSerial(benchmark::State& s) { run(s, pqs::kernels::Exec::Serial); }
void BM_GradientParallel(benchmark::State& s) { run(s, pqs::kernels::Exec::Parallel); }

}  // namespace

BENCHMARK(BM_GradientSerial)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_GradientParallel)->Arg(64)->Arg(256)->Arg(512);

BENCHMARK_MAIN();
