#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "pint/diagnostics.hpp"

using namespace pint;

namespace {

Trajectory constant_trajectory(const Vector& s, int n_t) {
  Trajectory t;
  t.grid = TimeGrid{1.0, 1.0 / n_t, n_t};
  t.states.assign(n_t + 1, s);
  return t;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Norms, SpaceTimeErrors) {
  const Grid g{1, 11, 0.1};
  const auto ref = constant_trajectory(Vector::Zero(11), 3);
  EXPECT_EQ(error_linf_l2(ref.blocks(), ref, g), 0.0);

  const auto shifted = constant_trajectory(Vector::Constant(11, -0.7), 3);
  EXPECT_NEAR(error_linf_l2(shifted, ref, g), 0.7, 1e-15);
  EXPECT_NEAR(error_linf_linf(shifted, ref), 0.7, 1e-15);

  const Grid unit{1, 5, 1.0};
  BlockMatrix e = BlockMatrix::Zero(5, 2);
  e(1, 1) = 1.0;
  EXPECT_NEAR(error_linf_l2(e, constant_trajectory(Vector::Zero(5), 2), unit), 1.0, 1e-15);
  EXPECT_THROW((void)error_linf_l2(BlockMatrix::Zero(5, 3), constant_trajectory(Vector::Zero(5), 2), unit),
               ShapeError);
}

TEST(Norms, BlockErrorPicksWorstColumn) {
  const Grid g{1, 3, 0.5};
  BlockMatrix d = BlockMatrix::Zero(3, 2);
  d(1, 0) = 2.0;
  d(0, 1) = -3.0;
  EXPECT_DOUBLE_EQ(block_error(d, NormKind::LinfLinf, g), 3.0);
  // Endpoint rows carry half weight: max(sqrt(0.5 * 4), sqrt(0.5 * 0.5 * 9)).
  EXPECT_NEAR(block_error(d, NormKind::LinfL2, g), 1.5, 1e-15);
}

TEST(Norms, NamesRoundTrip) {
  for (auto k : {NormKind::LinfL2, NormKind::LinfLinf}) EXPECT_EQ(norm_kind_from_string(to_string(k)), k);
  EXPECT_THROW((void)norm_kind_from_string("l1"), std::invalid_argument);
}

TEST(Energy, ConstantStates) {
  const Grid g{1, 21, 0.05};
  EXPECT_NEAR(discrete_energy(Vector::Ones(21), 0.1, g), 0.0, 1e-15);
  EXPECT_NEAR(discrete_energy(Vector::Zero(21), 0.1, g), 0.25, 1e-15);
  const Grid g2{2, 11, 0.1};
  EXPECT_NEAR(discrete_energy(Vector::Zero(121), 0.1, g2), 0.25, 1e-14);
}

TEST(Energy, LinearProfileAgainstQuadrature) {
  const int n = 2001;
  const double h = 1.0 / (n - 1);
  Vector u(n);
  for (int i = 0; i < n; ++i) u(i) = i * h;
  const double potential = oracle::simpson([](double x) { return 0.25 * (x * x - 1) * (x * x - 1); }, 0, 1);
  const double expect = potential + 0.5 * 0.01 * 1.0;
  EXPECT_NEAR(expect, 0.1383333, 1e-6);
  EXPECT_NEAR(discrete_energy(u, 0.1, Grid{1, n, h}), expect, 1e-7);
}

TEST(Energy, TwoDimensionalGradientMatchesSeparableProfile) {
  const int n = 41;
  const double h = 1.0 / (n - 1);
  Vector u(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) u(i + n * j) = 0.3 * i * h;
  const double potential = oracle::simpson([](double x) {
    const double v = 0.3 * x;
    return 0.25 * (v * v - 1) * (v * v - 1);
  }, 0, 1);
  EXPECT_NEAR(discrete_energy(u, 0.2, Grid{2, n, h}), potential + 0.5 * 0.04 * 0.09, 1e-4);
}

TEST(Mass, TrapezoidWeighted) {
  const Grid g{1, 5, 0.25};
  EXPECT_NEAR(total_mass(Vector::Ones(5), g), 1.0, 1e-15);
  const Grid g2{2, 5, 0.25};
  EXPECT_NEAR(total_mass(Vector::Ones(25), g2), 1.0, 1e-15);
  const auto t = constant_trajectory(Vector::Constant(5, 0.3), 4);
  const auto trace = physics_trace(t, 0.1, g);
  EXPECT_EQ(trace.mass.size(), 5u);
  EXPECT_EQ(relative_mass_drift(trace, t, g), 0.0);
  EXPECT_LE(max_energy_increase(trace), 0.0);
}

TEST(Report, CsvFormat) {
  ConvergenceReport r;
  r.initial_error = 2.0;
  r.errors = {1e-3, 1e-6};
  r.theoretical_rho = 0.5;
  EXPECT_EQ(report_csv(r), "k,error,bound\n1,0.001,1\n2,1e-06,0.5\n");
  r.theoretical_rho.reset();
  EXPECT_EQ(report_csv(r), "k,error,bound\n1,0.001,\n2,1e-06,\n");
}

TEST(Report, JsonRoundTripAndNonFinite) {
  ConvergenceReport r;
  r.norm_kind = NormKind::LinfLinf;
  r.initial_error = 0.75;
  r.errors = {0.1, std::numeric_limits<double>::infinity()};
  r.modal_errors = {0.05, 0.01};
  r.inner_iterations = {3, 4};
  r.theoretical_rho = 1.0 / 3.0;
  r.iterations = 2;
  r.wallclock = 0.5;
  PhysicsTrace tr{{1.0, 0.9}, {0.2, 0.2}};
  const auto dir = std::filesystem::temp_directory_path() / "pint_diag_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "r.json").string();
  write_report(r, tr, path, ReportFormat::Json, {{"problem", "Biharmonic1D"}});
  const auto back = read_report_json(path);
  EXPECT_EQ(back.report.norm_kind, NormKind::LinfLinf);
  EXPECT_EQ(back.report.errors[0], 0.1);
  EXPECT_TRUE(std::isinf(back.report.errors[1]));
  EXPECT_EQ(*back.report.theoretical_rho, 1.0 / 3.0);
  EXPECT_EQ(back.report.inner_iterations, r.inner_iterations);
  EXPECT_EQ(back.trace.energy, tr.energy);
  EXPECT_EQ(back.config.at("problem"), "Biharmonic1D");

  const std::string csv = (dir / "r.csv").string();
  write_report(r, tr, csv, ReportFormat::Csv);
  EXPECT_EQ(slurp(csv), report_csv(r));
  EXPECT_THROW(write_report(r, tr, (dir / "missing" / "x.csv").string(), ReportFormat::Csv), std::runtime_error);
  std::filesystem::remove_all(dir);
}
