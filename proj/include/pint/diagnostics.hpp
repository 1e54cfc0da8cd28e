#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pint/common.hpp"
#include "pint/reference_steppers.hpp"

namespace pint {

enum class NormKind { LinfL2, LinfLinf };

[[nodiscard]] std::string to_string(NormKind kind);
[[nodiscard]] NormKind norm_kind_from_string(const std::string& name);

struct ConvergenceReport {
  NormKind norm_kind = NormKind::LinfL2;
  double tol = 1e-10;
  double initial_error = 0.0;
  std::vector<double> errors;        // k = 1 .. iterations
  std::vector<double> modal_errors;  // same norm applied to P^{-1} e
  std::vector<int> inner_iterations;  // nonlinear solvers only
  std::optional<double> theoretical_rho;
  bool converged = false;
  int iterations = 0;
  double imag_residue_max = 0.0;
  double wallclock = 0.0;
};

struct PhysicsTrace {
  std::vector<double> energy;
  std::vector<double> mass;
};

/// Trapezoid weights (1/2, 1, ..., 1, 1/2), tensorized in 2D.
[[nodiscard]] Vector trapezoid_weights(const Grid& grid);

/// sqrt(h^d sum w e^2).
[[nodiscard]] double weighted_l2(const Vector& e, const Grid& grid);

/// Columns of `candidate` are compared against states 1..n_t of `reference`.
[[nodiscard]] double error_linf_l2(const BlockMatrix& candidate, const Trajectory& reference, const Grid& grid);
[[nodiscard]] double error_linf_l2(const Trajectory& candidate, const Trajectory& reference, const Grid& grid);
[[nodiscard]] double error_linf_linf(const BlockMatrix& candidate, const Trajectory& reference);
[[nodiscard]] double error_linf_linf(const Trajectory& candidate, const Trajectory& reference);

/// Max over columns of the chosen spatial norm of the block difference.
[[nodiscard]] double block_error(const BlockMatrix& diff, NormKind kind, const Grid& grid);

[[nodiscard]] double discrete_energy(const Vector& u, double epsilon, const Grid& grid);
[[nodiscard]] double total_mass(const Vector& u, const Grid& grid);
[[nodiscard]] PhysicsTrace physics_trace(const Trajectory& traj, double epsilon, const Grid& grid);

/// max_n |m_n - m_0| / max(|m_0|, h^d sum w |u_0|).
[[nodiscard]] double relative_mass_drift(const PhysicsTrace& trace, const Trajectory& traj, const Grid& grid);
/// Largest increase E_{n+1} - E_n (<= 0 for a decaying sequence).
[[nodiscard]] double max_energy_increase(const PhysicsTrace& trace);

enum class ReportFormat { Csv, Json };

using ConfigEcho = std::map<std::string, std::string>;

void write_report(const ConvergenceReport& report, const PhysicsTrace& trace, const std::string& path,
                  ReportFormat format, const ConfigEcho& config = {});

[[nodiscard]] std::string report_csv(const ConvergenceReport& report);
[[nodiscard]] std::string report_json(const ConvergenceReport& report, const PhysicsTrace& trace,
                                      const ConfigEcho& config = {});

struct ParsedReport {
  ConvergenceReport report;
  PhysicsTrace trace;
  ConfigEcho config;
};
[[nodiscard]] ParsedReport read_report_json(const std::string& path);

}  // namespace pint
