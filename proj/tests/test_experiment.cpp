#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "pint/experiment.hpp"

using namespace pint;

namespace {

namespace fs = std::filesystem;

bool mentions(const ConfigError& e, const std::string& needle) {
  for (const auto& p : e.problems())
    if (p.find(needle) != std::string::npos) return true;
  return false;
}

ConfigError parse_error(const KeyValues& kv) {
  try {
    (void)parse_config(kv);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "expected a ConfigError";
  return ConfigError({});
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PINT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, ProblemDefaults) {
  const auto b = parse_config({});
  EXPECT_EQ(b.problem, ProblemKind::Biharmonic1D);
  EXPECT_EQ(b.n_x(), 65);
  EXPECT_EQ(b.n_t(), 1000);

  const auto ch = parse_config({{"problem", "CH1D_PintI"}});
  EXPECT_DOUBLE_EQ(ch.dt, 1e-4);
  EXPECT_DOUBLE_EQ(ch.t_final, 0.1);
  EXPECT_DOUBLE_EQ(ch.eps2, 0.05);
  EXPECT_DOUBLE_EQ(ch.alpha, 0.01);
  EXPECT_EQ(ch.n_x(), 129);

  const auto lin = parse_config({{"problem", "LinCH1D"}});
  EXPECT_DOUBLE_EQ(lin.beta, 0.2);
  EXPECT_DOUBLE_EQ(lin.eps2, 0.01);
}

TEST(Config, OverridesAndFractions) {
  const auto c = parse_config({{"h", "1/128"}, {"alpha", "0.01"}, {"alpha", "0.02"}, {"epsilon", "0.1"}});
  EXPECT_EQ(c.n_x(), 129);
  EXPECT_DOUBLE_EQ(c.alpha, 0.02);
  EXPECT_NEAR(c.eps2, 0.01, 1e-15);
}

TEST(Config, CollectsEveryProblem) {
  const auto e = parse_error({{"bogus", "1"}, {"alpha", "1.5"}, {"dt", "0.3"}, {"max_iter", "x"}});
  EXPECT_TRUE(mentions(e, "unknown key 'bogus'"));
  EXPECT_TRUE(mentions(e, "alpha"));
  EXPECT_TRUE(mentions(e, "not an integer"));
  EXPECT_TRUE(mentions(e, "T / dt"));
}

TEST(Config, ProblemSpecificKeys) {
  EXPECT_TRUE(mentions(parse_error({{"problem", "CH1D_PintI"}, {"theta", "0.5"}}), "theta"));
  EXPECT_TRUE(mentions(parse_error({{"problem", "Biharmonic1D"}, {"beta", "0.2"}}), "beta"));
  EXPECT_TRUE(mentions(parse_error({{"inner_tol", "1e-9"}}), "inner_tol"));
  EXPECT_TRUE(mentions(parse_error({{"problem", "Heat"}}), "problem"));
  EXPECT_TRUE(mentions(parse_error({{"problem", "CH2D_PintI"}, {"h", "1/128"}}), "capped"));
  EXPECT_TRUE(mentions(parse_error({{"problem", "CH2D_PintI"}, {"initial_condition", "PaperCH1D"}}), "1D"));
  EXPECT_TRUE(mentions(parse_error({{"initial_condition", "Custom"}}), "ic_file"));
}

TEST(Config, FileReader) {
  const fs::path p = fs::temp_directory_path() / "pint_cfg_test.cfg";
  {
    std::ofstream out(p);
    out << "# comment\nproblem = LinCH1D\n\nalpha = 0.01   # trailing\n";
  }
  const auto kv = read_config_file(p.string());
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[1].second, "0.01");
  {
    std::ofstream out(p);
    out << "no equals sign\n";
  }
  EXPECT_THROW((void)read_config_file(p.string()), ConfigError);
  fs::remove(p);
  EXPECT_THROW((void)read_config_file(p.string()), ConfigError);
}

TEST(Config, EchoRoundTrips) {
  const auto c = parse_config({{"problem", "LinCH1D"}, {"alpha", "0.01"}, {"tag", "x"}});
  KeyValues kv;
  for (const auto& [k, v] : echo(c))
    if (k != "n_x" && k != "n_t") kv.emplace_back(k, v);
  const auto back = parse_config(kv);
  EXPECT_EQ(back.problem, c.problem);
  EXPECT_DOUBLE_EQ(back.alpha, c.alpha);
  EXPECT_DOUBLE_EQ(back.beta, c.beta);
  EXPECT_EQ(back.tag, "x");
}

TEST(InitialCondition, Builtins) {
  const Grid g{1, 5, 0.25};
  const Vector u = builtin_initial_condition(InitialConditionKind::PaperCH1D, g, 1);
  EXPECT_NEAR(u(0), 0.25, 1e-15);
  EXPECT_NEAR(u(1), 0.75 - 0.25, 1e-15);
  const Grid g2{2, 5, 0.25};
  const Vector r = builtin_initial_condition(InitialConditionKind::PaperCH2D_random, g2, 9);
  EXPECT_EQ(r, builtin_initial_condition(InitialConditionKind::PaperCH2D_random, g2, 9));
  EXPECT_LE(r.cwiseAbs().maxCoeff(), 0.1);
  EXPECT_THROW((void)builtin_initial_condition(InitialConditionKind::PaperCH1D, g2, 1), ShapeError);
}

TEST(RunExperiment, SmallLinearRunWritesReports) {
  const fs::path dir = fs::temp_directory_path() / "pint_run_test";
  fs::remove_all(dir);
  auto c = parse_config({{"h", "1/16"}, {"dt", "0.01"}, {"alpha", "0.01"}, {"oracle_check", "true"},
                         {"output", dir.string()}, {"tag", "a b"}});
  const auto s = run_experiment(c);
  EXPECT_TRUE(s.report.converged);
  ASSERT_TRUE(s.health.oracle_difference.has_value());
  EXPECT_LT(*s.health.oracle_difference, 1e-8);
  ASSERT_EQ(s.written.size(), 2u);
  EXPECT_TRUE(fs::exists(dir / "Biharmonic1D_a_b.csv"));
  const auto parsed = read_report_json((dir / "Biharmonic1D_a_b.json").string());
  EXPECT_EQ(parsed.report.errors, s.report.errors);

  const std::string first = slurp(dir / "Biharmonic1D_a_b.csv");
  c.workers = 4;
  c.oracle_check = false;
  (void)run_experiment(c);
  EXPECT_EQ(slurp(dir / "Biharmonic1D_a_b.csv"), first);
  fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = fs::temp_directory_path() / "pint_cli_test";
  fs::remove_all(dir);
  EXPECT_EQ(run_cli("check"), 0);
  EXPECT_EQ(run_cli("check -s alpha=2"), 2);
  EXPECT_EQ(run_cli("check -s nonsense=1"), 2);
  EXPECT_EQ(run_cli("check /nonexistent/file.cfg"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("run -s h=1/16 -s dt=0.01 -o " + dir.string()), 0);
  EXPECT_EQ(run_cli("run -s h=1/16 -s dt=0.01 -s max_iter=1 -s tol=1e-14"), 1);
  EXPECT_EQ(run_cli("sweep --key alpha --values 0.01,0.02 -s h=1/16 -s dt=0.01 -o " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "Biharmonic1D_alpha_0.01.csv"));
  EXPECT_TRUE(fs::exists(dir / "Biharmonic1D_alpha_0.02.csv"));
  EXPECT_EQ(run_cli("sweep --key alpha --values 0.01,7 -s h=1/16 -s dt=0.01"), 2);
  fs::remove_all(dir);
}
