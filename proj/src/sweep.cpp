#include <omp.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "pqspectra/error.hpp"
#include "pqspectra/solvers.hpp"

namespace pqs {

namespace {

SweepRecord solve_point(const ProblemConfig& base, double lambda, const SigmaEstimate& sigma, CaseTag tag) {
  SweepRecord rec;
  rec.lambda = lambda;
  rec.sigma_ref = sigma.value;
  try {
    const ProblemConfig cfg = base.with_lambda(lambda);
    const SolveReport r = tag == CaseTag::HomogeneousPPlusLtQ ? nehari_minimize(cfg, sigma)
                                                              : constrained_global_minimize(cfg, sigma);
    rec.found = r.found() && (tag == CaseTag::HomogeneousPPlusLtQ || r.energy < 0.0);
    rec.energy = r.energy;
    rec.residual = r.residual;
    rec.u_norm = r.u_norm;
    rec.c = r.c.value_or(r.a.value_or(0.0));
    rec.d = r.d.value_or(r.a.value_or(0.0));
    rec.status = r.status;
  } catch (const Error& e) {
    rec.found = false;
    rec.status = std::string("error: ") + e.what();
  }
  return rec;
}

CaseTag homogeneous_tag(const ProblemConfig& cfg) {
  const CaseTag tag = classify_case(cfg).tag;
  if (tag != CaseTag::HomogeneousPPlusLtQ && tag != CaseTag::HomogeneousQLtPMinus)
    throw PreconditionError("eigen_sweep: requires a homogeneous case, got " + to_string(tag));
  return tag;
}

}  // namespace

SweepResult eigen_sweep(const ProblemConfig& cfg, const std::vector<double>& lambdas, const SweepOptions& opt) {
  cfg.validate();
  const CaseTag tag = homogeneous_tag(cfg);
  const ConstraintSpace space = tag == CaseTag::HomogeneousPPlusLtQ ? ConstraintSpace::Cq : ConstraintSpace::C;
  return eigen_sweep(cfg, lambdas, sigma_threshold(cfg, space, opt.restarts, opt.seed), opt);
}

SweepResult eigen_sweep(const ProblemConfig& cfg, const std::vector<double>& lambdas, const SigmaEstimate& sigma,
                        const SweepOptions& opt) {
  cfg.validate();
  const CaseTag tag = homogeneous_tag(cfg);
  for (double l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l)) throw ValidationError("eigen_sweep: lambda values must be positive and finite");

  SweepResult out;
  out.sigma = sigma;

  std::vector<double> grid = lambdas;
  std::sort(grid.begin(), grid.end());
  out.records.resize(grid.size());
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(grid.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) out.records[i] = solve_point(cfg, grid[i], out.sigma, tag);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        omp_set_num_threads(1);
        for (std::size_t i = next++; i < grid.size(); i = next++) {
          try {
            out.records[i] = solve_point(cfg, grid[i], out.sigma, tag);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  bool seen = false;
  for (const auto& r : out.records) {
    if (r.found) seen = true;
    else if (seen) out.violations.push_back(r.lambda);
  }
  out.monotone = out.violations.empty();
  return out;
}

}  // namespace pqs
