#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "pqspectra/error.hpp"
#include "pqspectra/fields.hpp"

namespace pqs {

/// Malformed run configuration; what() starts with "path:line: " when a line is at fault.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Parsed run configuration.
///
/// Format: one `section.key = value` per line, `#` starts a comment. Exponent and
/// weight entries take a number or a quoted expression in x and y.
///
///   mesh.nx = 32
///   problem.r = "1.5 + 0.5*x"
struct RunConfig {
  double lx = 1.0, ly = 1.0;
  int nx = 16, ny = 16;
  std::string p = "2", q = "3", r = "1.5", alpha = "1", beta1 = "1", beta2 = "1";
  double lambda = 1.0;
  double epsilon_reg = 1e-8;

  std::optional<double> lambda_min, lambda_max;
  int steps = 12;
  bool relative_to_sigma = false;  ///< lambda_min/max are multiples of the sigma estimate

  double tol = 1e-9;
  double rel_tol = 1e-7;
  int max_iter = 20000;
  int restarts = 4;
  std::uint64_t seed = 0;
  std::optional<CaseTag> case_override;
  int k = 3;
  int path_points = 21;

  std::string output_dir;

  /// Canonical key = value listing of every field, one per line, sorted by key.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;
};

/// Throws ConfigError naming the line of the first problem.
RunConfig parse_run_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_run_config(const std::string& path);

/// Builds and validates the mesh and fields; errors are rethrown as ConfigError.
ProblemConfig to_problem(const RunConfig& rc);

std::uint64_t fnv1a64(const std::string& s);

}  // namespace pqs
