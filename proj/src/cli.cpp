#include "pqspectra/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <thread>

#include "pqspectra/config.hpp"
#include "pqspectra/format.hpp"
#include "pqspectra/solvers.hpp"

namespace pqs::cli {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Run {
  RunConfig rc;
  ProblemConfig cfg;
  fs::path out;
  std::string hash;
};

Run prepare(const Options& opt) {
  Run run;
  run.rc = load_run_config(opt.config_path);
  if (opt.seed) run.rc.seed = *opt.seed;
  if (opt.tol) {
    if (!(*opt.tol > 0.0)) throw ConfigError("--tol must be positive");
    run.rc.tol = *opt.tol;
  }
  run.cfg = to_problem(run.rc);
  run.hash = run.rc.hash();
  if (opt.out_dir) run.out = *opt.out_dir;
  else if (!run.rc.output_dir.empty()) run.out = run.rc.output_dir;
  else if (const char* env = std::getenv("PQSPECTRA_OUT"); env && *env) run.out = env;
  else run.out = ".";
  std::error_code ec;
  fs::create_directories(run.out, ec);
  if (ec || !fs::is_directory(run.out)) throw ConfigError("output directory " + run.out.string() + " is not usable");
  return run;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

void write_json(const fs::path& path, const Json& j) {
  auto f = open_output(path);
  f << j.dump(2) << '\n';
  if (!f) throw ConfigError("write failed: " + path.string());
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json report_json(const SolveReport& r) {
  Json j;
  j["case"] = to_string(r.case_class.tag);
  j["subcritical_margin"] = number(r.case_class.subcritical_margin);
  j["energy"] = number(r.energy);
  j["residual"] = number(r.residual);
  j["relative_residual"] = number(r.relative_residual);
  j["weighted_residual"] = number(r.weighted_residual);
  j["u_norm"] = number(r.u_norm);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["nontrivial"] = r.nontrivial;
  j["found"] = r.found();
  j["status"] = r.status;
  j["message"] = r.message;
  j["seed_index"] = r.seed;
  Json m = Json::object();
  if (r.c) m["c"] = number(*r.c);
  if (r.d) m["d"] = number(*r.d);
  if (r.a) m["a"] = number(*r.a);
  j["multipliers"] = m;
  j["stationarity"] = number(r.stationarity);
  return j;
}

void write_outputs(const Run& run, const SolveReport& r, Json extra) {
  Json j;
  j["config_hash"] = run.hash;
  j["lambda"] = run.cfg.lambda;
  const Json body = report_json(r);
  for (auto& [k, v] : body.items()) j[k] = v;
  for (auto& [k, v] : extra.items()) j[k] = v;
  write_json(run.out / "report.json", j);

  auto field = open_output(run.out / "solution.field");
  field << "# config_hash=" << run.hash << '\n';
  write_field(field, *run.cfg.mesh, r.u.values);

  auto trace = open_output(run.out / "trace.csv");
  trace << "# config_hash=" << run.hash << '\n' << "iter,energy,residual\n";
  for (const auto& row : r.trace)
    trace << row.iter << ',' << format_double(row.energy) << ',' << format_double(row.residual) << '\n';
}

int guarded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << '\n';
    return ConfigFailure;
  } catch (const MeshMismatch& e) {
    log << "error: " << e.what() << '\n';
    return ConfigFailure;
  } catch (const PreconditionError& e) {
    log << "error: " << e.what() << '\n';
    return ConfigFailure;
  } catch (const ConvergenceError& e) {
    log << "error: " << e.what() << '\n';
    return Unconverged;
  }
}

}  // namespace

int cmd_solve(const Options& opt, std::ostream& log) {
  return guarded(log, [&] {
    const Run run = prepare(opt);
    const ProblemConfig& cfg = run.cfg;
    const CaseTag tag = run.rc.case_override.value_or(classify_case(cfg).tag);
    SolveReport report;
    Json extra;
    extra["dispatch"] = to_string(tag);
    switch (tag) {
      case CaseTag::SublinearA: {
        const auto family = solve_sublinear_family(cfg, run.rc.k);
        Json fam = Json::array();
        for (const auto& r : family)
          fam.push_back({{"seed_index", r.seed}, {"energy", number(r.energy)}, {"residual", number(r.residual)},
                         {"u_norm", number(r.u_norm)}});
        extra["family"] = fam;
        report = family.empty() ? minimize_descent(cfg, DiscreteFunction::zeros(cfg.mesh), cfg.tol.max_iter)
                                : family.front();
        break;
      }
      case CaseTag::SmallLambdaB: {
        const ThresholdReport th = estimate_c_star(cfg, 8, run.rc.seed);
        const BallResult ball = minimize_in_ball(cfg, th, 32, run.rc.seed);
        report = ball.report;
        extra["rho"] = number(ball.rho);
        extra["c_star_lower"] = number(th.c_star_lower);
        extra["lambda_cap"] = number(th.lambda_cap);
        extra["interior"] = ball.interior;
        extra["sphere_energy_min"] = number(*std::min_element(ball.sphere_energies.begin(), ball.sphere_energies.end()));
        extra["energy_lower_bound"] = number(ball.energy_lower_bound);
        break;
      }
      case CaseTag::SuperlinearC: {
        MountainPassOptions mo;
        mo.seed = run.rc.seed;
        const SphereLevel level = sample_sphere_level(cfg, mo.c_star_probes, mo.sphere_samples, mo.seed);
        const DiscreteFunction zeta = mountain_pass_endpoint(cfg, level.eta);
        const MountainPassResult mp = mountain_pass(cfg, zeta, run.rc.path_points, mo);
        report = mp.report;
        extra["eta"] = number(mp.eta);
        extra["b"] = number(mp.b);
        extra["path_max"] = number(mp.path_max);
        extra["path_iterations"] = mp.path_iterations;
        extra["endpoints_preserved"] = mp.endpoints_preserved;
        extra["nehari_residual"] = number(mp.nehari_residual);
        break;
      }
      case CaseTag::HomogeneousPPlusLtQ:
        report = nehari_minimize(cfg, run.rc.restarts, run.rc.seed);
        break;
      case CaseTag::HomogeneousQLtPMinus:
        report = constrained_global_minimize(cfg, run.rc.seed, run.rc.restarts);
        break;
      case CaseTag::Unclassified:
        report = minimize_descent(cfg, DiscreteFunction::zeros(cfg.mesh), cfg.tol.max_iter);
        break;
    }
    write_outputs(run, report, extra);
    log << to_string(tag) << ": " << report.status << ", energy " << format_double(report.energy) << ", residual "
        << format_double(report.residual) << '\n';
    return report.found() ? Ok : Unconverged;
  });
}

int cmd_sweep(const Options& opt, std::ostream& log) {
  return guarded(log, [&] {
    const Run run = prepare(opt);
    if (!run.rc.lambda_min) throw ConfigError(opt.config_path + ": sweep needs sweep.lambda_min and sweep.lambda_max");
    const CaseTag tag = classify_case(run.cfg).tag;
    if (tag != CaseTag::HomogeneousPPlusLtQ && tag != CaseTag::HomogeneousQLtPMinus)
      throw PreconditionError("sweep: requires a homogeneous case, got " + to_string(tag));
    SweepOptions so;
    so.restarts = run.rc.restarts;
    so.seed = run.rc.seed;
    so.jobs = opt.jobs.value_or(static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
    if (so.jobs < 1) throw ConfigError("--jobs must be >= 1");
    const ConstraintSpace space = tag == CaseTag::HomogeneousPPlusLtQ ? ConstraintSpace::Cq : ConstraintSpace::C;
    const SigmaEstimate sigma = sigma_threshold(run.cfg, space, so.restarts, so.seed);
    const double unit = run.rc.relative_to_sigma ? sigma.value : 1.0;
    const auto grid = geometric_grid(*run.rc.lambda_min * unit, *run.rc.lambda_max * unit, run.rc.steps);
    const SweepResult res = eigen_sweep(run.cfg, grid, sigma, so);

    auto csv = open_output(run.out / "sweep.csv");
    csv << "# config_hash=" << run.hash << '\n' << "lambda,found,energy,residual,u_norm,sigma_ref\n";
    for (const auto& r : res.records)
      csv << format_double(r.lambda) << ',' << (r.found ? "true" : "false") << ',' << format_double(r.energy) << ','
          << format_double(r.residual) << ',' << format_double(r.u_norm) << ',' << format_double(r.sigma_ref) << '\n';

    Json j;
    j["config_hash"] = run.hash;
    j["case"] = to_string(tag);
    j["sigma"] = number(res.sigma.value);
    j["sigma_spread"] = number(res.sigma.spread());
    j["monotone"] = res.monotone;
    j["violations"] = res.violations;
    Json rows = Json::array();
    for (const auto& r : res.records)
      rows.push_back({{"lambda", r.lambda}, {"found", r.found}, {"c", number(r.c)}, {"d", number(r.d)},
                      {"status", r.status}});
    j["records"] = rows;
    write_json(run.out / "report.json", j);
    std::size_t found = 0;
    for (const auto& r : res.records) found += r.found;
    log << "sweep: " << res.records.size() << " points, " << found << " found, sigma " << format_double(sigma.value)
        << (res.monotone ? "" : ", monotonicity violated") << '\n';
    return res.monotone ? Ok : Unconverged;
  });
}

int cmd_thresholds(const Options& opt, std::ostream& log) {
  return guarded(log, [&] {
    const Run run = prepare(opt);
    const ProblemConfig& cfg = run.cfg;
    const CaseClass cc = classify_case(cfg);
    Json j;
    j["config_hash"] = run.hash;
    j["case"] = to_string(cc.tag);
    j["subcritical_margin"] = number(cc.subcritical_margin);
    const ThresholdReport th = estimate_c_star(cfg, 8, run.rc.seed);
    j["c_star_lower"] = number(th.c_star_lower);
    j["rho"] = number(th.rho);
    switch (cc.tag) {
      case CaseTag::SmallLambdaB:
        j["lambda_cap"] = number(th.lambda_cap);
        j["sphere_bound"] = number(th.sphere_bound);
        j["lambda_safe"] = number(0.1 * th.lambda_cap);
        break;
      case CaseTag::SuperlinearC: {
        const SphereLevel level = sample_sphere_level(cfg, 8, 32, run.rc.seed);
        j["eta"] = number(level.eta);
        j["b"] = number(level.b);
        break;
      }
      case CaseTag::HomogeneousPPlusLtQ:
      case CaseTag::HomogeneousQLtPMinus: {
        const ConstraintSpace space =
            cc.tag == CaseTag::HomogeneousPPlusLtQ ? ConstraintSpace::Cq : ConstraintSpace::C;
        const SigmaEstimate s = sigma_threshold(cfg, space, run.rc.restarts, run.rc.seed);
        j["sigma"] = number(s.value);
        j["sigma_spread"] = number(s.spread());
        j["sigma_samples"] = s.samples;
        break;
      }
      default:
        break;
    }
    write_json(run.out / "thresholds.json", j);
    log << "thresholds: " << to_string(cc.tag) << ", C* >= " << format_double(th.c_star_lower) << '\n';
    return Ok;
  });
}

int run(int argc, const char* const* argv, std::ostream& log) {
  CLI::App app{"Variable-exponent (p,q)-Laplacian eigenproblem solver"};
  app.require_subcommand(1);
  Options opt;
  std::string out;
  int jobs = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Run configuration")->required();
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--jobs", jobs, "Sweep workers")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--tol", tol, "Residual tolerance")->check(CLI::PositiveNumber);
  };
  CLI::App* solve = app.add_subcommand("solve", "Solve at one lambda");
  CLI::App* sweep = app.add_subcommand("sweep", "Lambda sweep over a geometric grid");
  CLI::App* thresholds = app.add_subcommand("thresholds", "Embedding and spectral thresholds");
  for (CLI::App* sub : {solve, sweep, thresholds}) add_common(sub);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      log << app.help();
      return Ok;
    }
    log << "error: " << e.what() << '\n';
    return ConfigFailure;
  }
  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--out")) opt.out_dir = out;
  if (sub->count("--jobs")) opt.jobs = jobs;
  if (sub->count("--seed")) opt.seed = seed;
  if (sub->count("--tol")) opt.tol = tol;
  if (sub == solve) return cmd_solve(opt, log);
  if (sub == sweep) return cmd_sweep(opt, log);
  return cmd_thresholds(opt, log);
}

}  // namespace pqs::cli
