#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace pqs::cli {

enum ExitCode : int { Ok = 0, ConfigFailure = 1, Unconverged = 2 };

struct Options {
  std::string config_path;
  std::optional<std::string> out_dir;  ///< falls back to output.dir, then PQSPECTRA_OUT, then "."
  std::optional<int> jobs;             ///< sweep worker count; default hardware concurrency
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

/// Writes report.json, solution.field and trace.csv.
int cmd_solve(const Options& opt, std::ostream& log);
/// Writes sweep.csv and report.json.
int cmd_sweep(const Options& opt, std::ostream& log);
/// Writes thresholds.json.
int cmd_thresholds(const Options& opt, std::ostream& log);

/// `pqspectra solve|sweep|thresholds --config <path> [--out <dir>] [--jobs N] [--seed S] [--tol T]`
int run(int argc, const char* const* argv, std::ostream& log);

}  // namespace pqs::cli
