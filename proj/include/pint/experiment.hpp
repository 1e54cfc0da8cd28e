#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pint/common.hpp"
#include "pint/convergence_theory.hpp"
#include "pint/diagnostics.hpp"
#include "pint/pint_cahn_hilliard.hpp"

namespace pint {

enum class ProblemKind {
  Biharmonic1D,
  Biharmonic2D,
  LinCH1D,
  LinCH2D,
  CH1D_PintI,
  CH1D_PintII,
  CH2D_PintI,
  CH2D_PintII,
  General4th1D,
};

enum class InitialConditionKind { PaperCH1D, PaperCH2D_random, Custom };

[[nodiscard]] std::string to_string(ProblemKind p);
[[nodiscard]] std::string to_string(InitialConditionKind k);
[[nodiscard]] bool is_cahn_hilliard(ProblemKind p);
[[nodiscard]] int problem_dim(ProblemKind p);

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::Biharmonic1D;
  double h = 1.0 / 64;
  double dt = 1e-3;
  double t_final = 1.0;
  double alpha = 1e-3;
  double theta = 1.0;
  double eps2 = 0.01;
  double beta = 0.0;
  double tol = 1e-10;
  int max_iter = 50;
  std::uint64_t seed = 42;
  int workers = 1;
  std::string output;  // directory; empty writes nothing
  InitialConditionKind initial_condition = InitialConditionKind::PaperCH1D;
  std::string ic_file;
  double domain_length = 1.0;
  NormKind norm = NormKind::LinfL2;
  double inner_tol = 1e-12;
  int inner_max = 50;
  JacobianForm jacobian = JacobianForm::Printed;
  bool oracle_check = false;
  std::string tag;  // appended to output file names

  [[nodiscard]] int n_x() const;
  [[nodiscard]] double effective_h() const;
  [[nodiscard]] int n_t() const;
};

/// Carries every validation failure, one per line in what().
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  [[nodiscard]] const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat "key = value" lines; '#' starts a comment.
[[nodiscard]] KeyValues read_config_file(const std::string& path);

/// Later entries override earlier ones. Defaults follow the problem chosen;
/// unknown keys, malformed values and inconsistent fields all throw
/// ConfigError listing every failure.
[[nodiscard]] ExperimentConfig parse_config(const KeyValues& kv);

/// PINT_OUTPUT_DIR and PINT_WORKERS, when set, take precedence.
void apply_environment(ExperimentConfig& cfg);

[[nodiscard]] ConfigEcho echo(const ExperimentConfig& cfg);

/// PaperCH1D: 0.75 sin(2 pi x) + 0.25 cos(4 pi x) (1D only).
/// PaperCH2D_random: 0.1 * uniform[-1, 1], seeded (2D only).
[[nodiscard]] Vector builtin_initial_condition(InitialConditionKind kind, const Grid& grid, std::uint64_t seed);

struct SolverHealth {
  double imag_residue_max = 0.0;
  std::vector<int> inner_iterations;
  std::optional<double> oracle_difference;
  long warnings = 0;
};

struct RunSummary {
  ExperimentConfig config;
  ConvergenceReport report;
  PhysicsTrace trace;
  std::optional<Bound> bound;
  SolverHealth health;
  double mass_drift = 0.0;
  double max_energy_increase = 0.0;
  std::vector<std::string> written;
};

/// Sequential reference, PinT run from the seeded random guess, trace of the
/// final iterate; report files are written when cfg.output is set.
[[nodiscard]] RunSummary run_experiment(const ExperimentConfig& cfg);

[[nodiscard]] std::string output_stem(const ExperimentConfig& cfg);

}  // namespace pint
