#include "pqspectra/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "pqspectra/expression.hpp"
#include "pqspectra/format.hpp"
#include "pqspectra/mesh.hpp"

namespace pqs {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Drops a trailing comment, ignoring '#' inside double quotes.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    else if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

double to_number(const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw std::invalid_argument("expected a number, got '" + v + "'");
  return out;
}

long long to_integer(const std::string& v) {
  long long out = 0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw std::invalid_argument("expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + v + "'");
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  if (!v.empty() && (v.front() == '"' || v.back() == '"')) throw std::invalid_argument("unbalanced quote in " + v);
  return v;
}

std::string expression_value(const std::string& v) {
  const std::string e = unquote(v);
  Expression::parse(e);
  return e;
}

int positive_int(const std::string& v, const char* what) {
  const long long n = to_integer(v);
  if (n < 1 || n > 1000000000) throw std::invalid_argument(std::string(what) + " must be a positive integer");
  return static_cast<int>(n);
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"mesh.lx", [](RunConfig& c, const std::string& v) { c.lx = to_number(v); }},
      {"mesh.ly", [](RunConfig& c, const std::string& v) { c.ly = to_number(v); }},
      {"mesh.nx", [](RunConfig& c, const std::string& v) { c.nx = positive_int(v, "mesh.nx"); }},
      {"mesh.ny", [](RunConfig& c, const std::string& v) { c.ny = positive_int(v, "mesh.ny"); }},
      {"problem.p", [](RunConfig& c, const std::string& v) { c.p = expression_value(v); }},
      {"problem.q", [](RunConfig& c, const std::string& v) { c.q = expression_value(v); }},
      {"problem.r", [](RunConfig& c, const std::string& v) { c.r = expression_value(v); }},
      {"problem.alpha", [](RunConfig& c, const std::string& v) { c.alpha = expression_value(v); }},
      {"problem.beta1", [](RunConfig& c, const std::string& v) { c.beta1 = expression_value(v); }},
      {"problem.beta2", [](RunConfig& c, const std::string& v) { c.beta2 = expression_value(v); }},
      {"problem.lambda", [](RunConfig& c, const std::string& v) { c.lambda = to_number(v); }},
      {"problem.epsilon_reg", [](RunConfig& c, const std::string& v) { c.epsilon_reg = to_number(v); }},
      {"sweep.lambda_min", [](RunConfig& c, const std::string& v) { c.lambda_min = to_number(v); }},
      {"sweep.lambda_max", [](RunConfig& c, const std::string& v) { c.lambda_max = to_number(v); }},
      {"sweep.steps", [](RunConfig& c, const std::string& v) { c.steps = positive_int(v, "sweep.steps"); }},
      {"sweep.relative_to_sigma", [](RunConfig& c, const std::string& v) { c.relative_to_sigma = to_bool(v); }},
      {"solver.tol", [](RunConfig& c, const std::string& v) { c.tol = to_number(v); }},
      {"solver.rel_tol", [](RunConfig& c, const std::string& v) { c.rel_tol = to_number(v); }},
      {"solver.max_iter", [](RunConfig& c, const std::string& v) { c.max_iter = positive_int(v, "solver.max_iter"); }},
      {"solver.restarts", [](RunConfig& c, const std::string& v) { c.restarts = positive_int(v, "solver.restarts"); }},
      {"solver.seed",
       [](RunConfig& c, const std::string& v) {
         const long long s = to_integer(v);
         if (s < 0) throw std::invalid_argument("solver.seed must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"solver.case", [](RunConfig& c, const std::string& v) { c.case_override = case_from_string(unquote(v)); }},
      {"solver.k", [](RunConfig& c, const std::string& v) { c.k = positive_int(v, "solver.k"); }},
      {"solver.path_points",
       [](RunConfig& c, const std::string& v) { c.path_points = positive_int(v, "solver.path_points"); }},
      {"output.dir", [](RunConfig& c, const std::string& v) { c.output_dir = unquote(v); }},
  };
  return table;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> kv{
      {"mesh.lx", format_double(lx)},
      {"mesh.ly", format_double(ly)},
      {"mesh.nx", std::to_string(nx)},
      {"mesh.ny", std::to_string(ny)},
      {"problem.p", p},
      {"problem.q", q},
      {"problem.r", r},
      {"problem.alpha", alpha},
      {"problem.beta1", beta1},
      {"problem.beta2", beta2},
      {"problem.lambda", format_double(lambda)},
      {"problem.epsilon_reg", format_double(epsilon_reg)},
      {"sweep.steps", std::to_string(steps)},
      {"sweep.relative_to_sigma", relative_to_sigma ? "true" : "false"},
      {"solver.tol", format_double(tol)},
      {"solver.rel_tol", format_double(rel_tol)},
      {"solver.max_iter", std::to_string(max_iter)},
      {"solver.restarts", std::to_string(restarts)},
      {"solver.seed", std::to_string(seed)},
      {"solver.k", std::to_string(k)},
      {"solver.path_points", std::to_string(path_points)},
  };
  if (lambda_min) kv["sweep.lambda_min"] = format_double(*lambda_min);
  if (lambda_max) kv["sweep.lambda_max"] = format_double(*lambda_max);
  if (case_override) kv["solver.case"] = to_string(*case_override);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    const auto where = origin + ":" + std::to_string(line) + ": ";
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (auto prev = seen.find(key); prev != seen.end())
      throw ConfigError(where + "duplicate key '" + key + "' (first set on line " + std::to_string(prev->second) + ")");
    seen[key] = line;
    if (value.empty()) throw ConfigError(where + "empty value for '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  if (cfg.lambda_min.has_value() != cfg.lambda_max.has_value())
    throw ConfigError(origin + ": sweep.lambda_min and sweep.lambda_max must be given together");
  if (cfg.lambda_min && !(*cfg.lambda_min > 0.0 && *cfg.lambda_min <= *cfg.lambda_max))
    throw ConfigError(origin + ": sweep grid needs 0 < lambda_min <= lambda_max");
  if (!(cfg.tol > 0.0) || !(cfg.rel_tol > 0.0)) throw ConfigError(origin + ": solver tolerances must be positive");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str(), path);
}

ProblemConfig to_problem(const RunConfig& rc) {
  try {
    ProblemConfig cfg;
    cfg.mesh = build_rectangle_mesh(rc.lx, rc.ly, rc.nx, rc.ny);
    cfg.p = make_exponent(cfg.mesh, Expression::parse(rc.p));
    cfg.q = make_exponent(cfg.mesh, Expression::parse(rc.q));
    cfg.r = make_exponent(cfg.mesh, Expression::parse(rc.r));
    cfg.alpha = make_volume_weight(cfg.mesh, Expression::parse(rc.alpha));
    cfg.beta1 = make_boundary_weight(cfg.mesh, Expression::parse(rc.beta1));
    cfg.beta2 = make_boundary_weight(cfg.mesh, Expression::parse(rc.beta2));
    cfg.lambda = rc.lambda;
    cfg.epsilon_reg = rc.epsilon_reg;
    cfg.tol.residual = rc.tol;
    cfg.tol.relative_residual = rc.rel_tol;
    cfg.tol.max_iter = rc.max_iter;
    cfg.validate();
    return cfg;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid problem: ") + e.what());
  }
}

}  // namespace pqs
