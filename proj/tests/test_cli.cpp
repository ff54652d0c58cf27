#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pqspectra/cli.hpp"
#include "pqspectra/config.hpp"
#include "pqspectra/mesh.hpp"
#include <json.hpp>

namespace fs = std::filesystem;
using namespace pqs;

namespace {

const char* kSublinear = R"(# sublinear fixture
mesh.nx = 16
mesh.ny = 16
problem.p = 2
problem.q = 3
problem.r = 1.5
problem.alpha = 1
problem.beta1 = 1
problem.beta2 = 1
problem.lambda = 1
)";

const char* kHomogeneous = R"(mesh.nx = 12
mesh.ny = 12
problem.p = 2.5
problem.q = 4
problem.r = 4
problem.beta1 = 0
problem.beta2 = 0
sweep.lambda_min = 2
sweep.lambda_max = 2
sweep.steps = 1
sweep.relative_to_sigma = true
solver.restarts = 2
)";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pqspectra_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  int run(std::vector<std::string> args) {
    std::vector<const char*> argv{"pqspectra"};
    for (const auto& a : args) argv.push_back(a.c_str());
    log_.str("");
    return cli::run(static_cast<int>(argv.size()), argv.data(), log_);
  }
  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream log_;
};

}  // namespace

TEST_F(Cli, SolveSublinearWritesArtifacts) {
  const auto cfg = write("a.conf", kSublinear);
  const auto out = dir_ / "out";
  ASSERT_EQ(run({"solve", "--config", cfg, "--out", out.string()}), cli::Ok) << log_.str();
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_LT(report["energy"].get<double>(), 0.0);
  EXPECT_TRUE(report["converged"].get<bool>());
  const std::string hash = load_run_config(cfg).hash();
  EXPECT_EQ(report["config_hash"].get<std::string>(), hash);
  for (const char* f : {"solution.field", "trace.csv"})
    EXPECT_EQ(slurp(out / f).rfind("# config_hash=" + hash + "\n", 0), 0u) << f;
  std::ifstream field(out / "solution.field");
  const auto dump = read_field(field);
  EXPECT_EQ(dump.nx, 16);
  EXPECT_EQ(dump.values.size(), 17u * 17u);
  EXPECT_NE(slurp(out / "trace.csv").find("iter,energy,residual\n"), std::string::npos);
}

TEST_F(Cli, SolveIsByteIdentical) {
  const auto cfg = write("a.conf", kSublinear);
  ASSERT_EQ(run({"solve", "--config", cfg, "--out", (dir_ / "1").string()}), cli::Ok);
  ASSERT_EQ(run({"solve", "--config", cfg, "--out", (dir_ / "2").string()}), cli::Ok);
  for (const char* f : {"report.json", "solution.field", "trace.csv"})
    EXPECT_EQ(slurp(dir_ / "1" / f), slurp(dir_ / "2" / f)) << f;
}

TEST_F(Cli, ExponentOneIsConfigError) {
  const auto cfg = write("bad.conf", std::string(kSublinear) + "problem.p = 1\n");
  // Duplicate key is itself an error; use a fresh config instead.
  const auto cfg2 = write("bad2.conf", "problem.p = 1\n");
  EXPECT_EQ(run({"solve", "--config", cfg, "--out", dir_.string()}), cli::ConfigFailure);
  EXPECT_EQ(run({"solve", "--config", cfg2, "--out", dir_.string()}), cli::ConfigFailure);
  EXPECT_NE(log_.str().find("C+"), std::string::npos) << log_.str();
}

TEST_F(Cli, ParseErrorsNameTheLine) {
  const auto cfg = write("bad.conf", "mesh.nx = 8\nmesh.bogus = 3\n");
  EXPECT_EQ(run({"solve", "--config", cfg}), cli::ConfigFailure);
  EXPECT_NE(log_.str().find("bad.conf:2:"), std::string::npos) << log_.str();
  try {
    parse_run_config("mesh.nx = 8\n\nproblem.p = \"2 + \"\n", "x.conf");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("x.conf:3:", 0), 0u) << e.what();
  }
  EXPECT_THROW(parse_run_config("mesh.nx = 8\nmesh.nx = 9\n"), ConfigError);
  EXPECT_THROW(parse_run_config("mesh.nx 8\n"), ConfigError);
  EXPECT_THROW(parse_run_config("mesh.nx = -3\n"), ConfigError);
  EXPECT_EQ(run({"solve", "--config", (dir_ / "missing.conf").string()}), cli::ConfigFailure);
}

TEST_F(Cli, UnwritableOutputIsConfigError) {
  const auto cfg = write("a.conf", kSublinear);
  const auto blocker = write("file", "x");
  EXPECT_EQ(run({"solve", "--config", cfg, "--out", blocker + "/sub"}), cli::ConfigFailure);
}

TEST_F(Cli, UnconvergedExitsTwo) {
  const auto cfg = write("a.conf", std::string(kSublinear) + "solver.max_iter = 1\n");
  EXPECT_EQ(run({"solve", "--config", cfg, "--out", dir_.string()}), cli::Unconverged);
  const auto report = nlohmann::json::parse(slurp(dir_ / "report.json"));
  EXPECT_FALSE(report["converged"].get<bool>());
}

TEST_F(Cli, EnvironmentOutputFallback) {
  const auto cfg = write("a.conf", kSublinear);
  const auto out = dir_ / "env";
  ::setenv("PQSPECTRA_OUT", out.c_str(), 1);
  const int code = run({"solve", "--config", cfg});
  ::unsetenv("PQSPECTRA_OUT");
  EXPECT_EQ(code, cli::Ok);
  EXPECT_TRUE(fs::exists(out / "report.json"));
}

TEST_F(Cli, OverridesChangeTheHash) {
  const auto cfg = write("a.conf", kSublinear);
  ASSERT_EQ(run({"solve", "--config", cfg, "--out", (dir_ / "1").string()}), cli::Ok);
  ASSERT_EQ(run({"solve", "--config", cfg, "--out", (dir_ / "2").string(), "--tol", "1e-10"}), cli::Ok);
  const auto h1 = nlohmann::json::parse(slurp(dir_ / "1" / "report.json"))["config_hash"];
  const auto h2 = nlohmann::json::parse(slurp(dir_ / "2" / "report.json"))["config_hash"];
  EXPECT_NE(h1, h2);
}

TEST_F(Cli, SinglePointSweep) {
  const auto cfg = write("h.conf", kHomogeneous);
  const auto out = dir_ / "sweep";
  ASSERT_EQ(run({"sweep", "--config", cfg, "--out", out.string(), "--jobs", "2"}), cli::Ok) << log_.str();
  std::istringstream csv(slurp(out / "sweep.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0].rfind("# config_hash=", 0), 0u);
  EXPECT_EQ(lines[1], "lambda,found,energy,residual,u_norm,sigma_ref");
  EXPECT_NE(lines[2].find(",true,"), std::string::npos) << lines[2];
}

TEST_F(Cli, SweepNeedsGridAndHomogeneousCase) {
  EXPECT_EQ(run({"sweep", "--config", write("a.conf", kSublinear), "--out", dir_.string()}), cli::ConfigFailure);
  const auto nogrid = write("b.conf", "problem.p = 2.5\nproblem.q = 4\nproblem.r = 4\nproblem.beta1 = 0\nproblem.beta2 = 0\n");
  EXPECT_EQ(run({"sweep", "--config", nogrid, "--out", dir_.string()}), cli::ConfigFailure);
}

TEST_F(Cli, Thresholds) {
  const auto b = write("b.conf", "mesh.nx = 16\nmesh.ny = 16\nproblem.r = \"1.5 + min(1, max(0, (hypot(x-0.5,y-0.5)-0.2)/0.1))\"\n");
  ASSERT_EQ(run({"thresholds", "--config", b, "--out", (dir_ / "b").string()}), cli::Ok) << log_.str();
  const auto tb = nlohmann::json::parse(slurp(dir_ / "b" / "thresholds.json"));
  EXPECT_GT(tb["lambda_cap"].get<double>(), 0.0);
  EXPECT_GT(tb["c_star_lower"].get<double>(), 0.0);

  const auto h = write("h.conf", kHomogeneous);
  ASSERT_EQ(run({"thresholds", "--config", h, "--out", (dir_ / "h").string()}), cli::Ok) << log_.str();
  const auto th = nlohmann::json::parse(slurp(dir_ / "h" / "thresholds.json"));
  EXPECT_GT(th["sigma"].get<double>(), 0.0);

  const auto c = write("c.conf", "problem.q = 2.5\nproblem.r = 4\n");
  ASSERT_EQ(run({"thresholds", "--config", c, "--out", (dir_ / "c").string()}), cli::Ok) << log_.str();
  const auto tc = nlohmann::json::parse(slurp(dir_ / "c" / "thresholds.json"));
  EXPECT_GT(tc["b"].get<double>(), 0.0);
  EXPECT_GT(tc["eta"].get<double>(), 0.0);
  EXPECT_FALSE(tc.contains("lambda_cap"));
  EXPECT_FALSE(tc.contains("sigma"));
}

TEST_F(Cli, BinaryExitCodes) {
  const auto good = write("a.conf", kSublinear);
  const auto bad = write("bad.conf", "problem.p = 1\n");
  const std::string bin = PQSPECTRA_CLI_PATH;
  const auto status = [&](const std::string& cfg) {
    const std::string cmd = bin + " solve --config " + cfg + " --out " + (dir_ / "bin").string() + " 2>/dev/null";
    const int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(good), 0);
  EXPECT_EQ(status(bad), 1);
  const int usage = std::system((bin + " frobnicate >/dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(usage), 1);
}
