#include "pint/diagnostics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pint {
namespace {

using nlohmann::json;

void check_blocks(const BlockMatrix& candidate, const Trajectory& reference) {
  if (reference.states.size() != static_cast<std::size_t>(candidate.cols()) + 1) {
    std::ostringstream msg;
    msg << "candidate has " << candidate.cols() << " blocks, reference has "
        << reference.states.size() << " states";
    throw ShapeError(msg.str());
  }
  if (candidate.cols() > 0 && candidate.rows() != reference.n_dof()) {
    throw ShapeError("candidate and reference differ in spatial size");
  }
}

BlockMatrix difference(const BlockMatrix& candidate, const Trajectory& reference) {
  check_blocks(candidate, reference);
  return candidate - reference.blocks();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

json number_array(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::vector<double> read_array(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(read_number(x));
  return v;
}

}  // namespace

std::string to_string(NormKind kind) { return kind == NormKind::LinfL2 ? "linf_l2" : "linf_linf"; }

NormKind norm_kind_from_string(const std::string& name) {
  if (name == "linf_l2") return NormKind::LinfL2;
  if (name == "linf_linf") return NormKind::LinfLinf;
  throw std::invalid_argument("unknown norm '" + name + "' (expected linf_l2 or linf_linf)");
}

Vector trapezoid_weights(const Grid& grid) {
  Vector w1 = Vector::Ones(grid.n_x);
  w1(0) = 0.5;
  w1(grid.n_x - 1) = 0.5;
  if (grid.dim == 1) return w1;
  Vector w(grid.n_dof());
  for (int j = 0; j < grid.n_x; ++j) w.segment(j * grid.n_x, grid.n_x) = w1 * w1(j);
  return w;
}

double weighted_l2(const Vector& e, const Grid& grid) {
  if (e.size() != grid.n_dof()) throw ShapeError("weighted_l2: length does not match the grid");
  const double cell = grid.dim == 1 ? grid.h : grid.h * grid.h;
  return std::sqrt(cell * trapezoid_weights(grid).dot(e.cwiseAbs2()));
}

double block_error(const BlockMatrix& diff, NormKind kind, const Grid& grid) {
  if (diff.cols() == 0) return 0.0;
  if (kind == NormKind::LinfLinf) return diff.cwiseAbs().maxCoeff();
  if (diff.rows() != grid.n_dof()) throw ShapeError("block_error: rows do not match the grid");
  const double cell = grid.dim == 1 ? grid.h : grid.h * grid.h;
  const Vector w = trapezoid_weights(grid);
  const Eigen::RowVectorXd per_block = w.transpose() * diff.cwiseAbs2();
  return std::sqrt(cell * per_block.maxCoeff());
}

double error_linf_l2(const BlockMatrix& candidate, const Trajectory& reference, const Grid& grid) {
  return block_error(difference(candidate, reference), NormKind::LinfL2, grid);
}

double error_linf_l2(const Trajectory& candidate, const Trajectory& reference, const Grid& grid) {
  return error_linf_l2(candidate.blocks(), reference, grid);
}

double error_linf_linf(const BlockMatrix& candidate, const Trajectory& reference) {
  const BlockMatrix d = difference(candidate, reference);
  return d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff();
}

double error_linf_linf(const Trajectory& candidate, const Trajectory& reference) {
  return error_linf_linf(candidate.blocks(), reference);
}

double discrete_energy(const Vector& u, double epsilon, const Grid& grid) {
  if (u.size() != grid.n_dof()) throw ShapeError("discrete_energy: length does not match the grid");
  const int n = grid.n_x;
  const double h = grid.h;
  const double eps2 = epsilon * epsilon;
  const Vector w = trapezoid_weights(grid);
  const Vector pot = u.unaryExpr([](double x) { return ChProblem::potential(x); });
  if (grid.dim == 1) {
    double grad = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
      const double d = (u(i + 1) - u(i)) / h;
      grad += d * d;
    }
    return h * w.dot(pot) + 0.5 * eps2 * h * grad;
  }
  const Vector w1 = trapezoid_weights(Grid{1, n, h});
  double grad = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      const double dx = (u(i + 1 + n * j) - u(i + n * j)) / h;
      const double dy = (u(j + n * (i + 1)) - u(j + n * i)) / h;
      grad += w1(j) * (dx * dx + dy * dy);
    }
  }
  return h * h * (w.dot(pot) + 0.5 * eps2 * grad);
}

double total_mass(const Vector& u, const Grid& grid) {
  if (u.size() != grid.n_dof()) throw ShapeError("total_mass: length does not match the grid");
  const double cell = grid.dim == 1 ? grid.h : grid.h * grid.h;
  return cell * trapezoid_weights(grid).dot(u);
}

PhysicsTrace physics_trace(const Trajectory& traj, double epsilon, const Grid& grid) {
  PhysicsTrace t;
  t.energy.reserve(traj.states.size());
  t.mass.reserve(traj.states.size());
  for (const auto& s : traj.states) {
    t.energy.push_back(discrete_energy(s, epsilon, grid));
    t.mass.push_back(total_mass(s, grid));
  }
  return t;
}

double relative_mass_drift(const PhysicsTrace& trace, const Trajectory& traj, const Grid& grid) {
  if (trace.mass.empty()) return 0.0;
  const double m0 = trace.mass.front();
  const double denom = std::max(std::abs(m0), total_mass(traj.states.front().cwiseAbs(), grid));
  double worst = 0.0;
  for (double m : trace.mass) worst = std::max(worst, std::abs(m - m0));
  return denom > 0.0 ? worst / denom : worst;
}

double max_energy_increase(const PhysicsTrace& trace) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < trace.energy.size(); ++n) {
    worst = std::max(worst, trace.energy[n] - trace.energy[n - 1]);
  }
  return trace.energy.size() < 2 ? 0.0 : worst;
}

std::string report_csv(const ConvergenceReport& report) {
  std::string out = "k,error,bound\n";
  for (std::size_t k = 0; k < report.errors.size(); ++k) {
    out += std::to_string(k + 1);
    out += ',';
    out += format_double(report.errors[k]);
    out += ',';
    if (report.theoretical_rho) {
      out += format_double(std::pow(*report.theoretical_rho, static_cast<double>(k + 1)) * report.initial_error);
    }
    out += '\n';
  }
  return out;
}

std::string report_json(const ConvergenceReport& report, const PhysicsTrace& trace, const ConfigEcho& config) {
  json j;
  j["config"] = config;
  j["norm_kind"] = to_string(report.norm_kind);
  j["tol"] = number(report.tol);
  j["initial_error"] = number(report.initial_error);
  j["errors"] = number_array(report.errors);
  j["modal_errors"] = number_array(report.modal_errors);
  j["inner_iterations"] = report.inner_iterations;
  j["theoretical_rho"] = report.theoretical_rho ? number(*report.theoretical_rho) : json(nullptr);
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  j["imag_residue_max"] = number(report.imag_residue_max);
  j["wallclock"] = number(report.wallclock);
  j["energy"] = number_array(trace.energy);
  j["mass"] = number_array(trace.mass);
  return j.dump(2) + "\n";
}

void write_report(const ConvergenceReport& report, const PhysicsTrace& trace, const std::string& path,
                  ReportFormat format, const ConfigEcho& config) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << (format == ReportFormat::Csv ? report_csv(report) : report_json(report, trace, config));
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

ParsedReport read_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path + "' is not valid JSON: " + e.what());
  }
  ParsedReport p;
  auto& r = p.report;
  r.norm_kind = norm_kind_from_string(j.at("norm_kind").get<std::string>());
  r.tol = read_number(j.at("tol"));
  r.initial_error = read_number(j.at("initial_error"));
  r.errors = read_array(j.at("errors"));
  r.modal_errors = read_array(j.at("modal_errors"));
  r.inner_iterations = j.at("inner_iterations").get<std::vector<int>>();
  if (!j.at("theoretical_rho").is_null()) r.theoretical_rho = read_number(j.at("theoretical_rho"));
  r.converged = j.at("converged").get<bool>();
  r.iterations = j.at("iterations").get<int>();
  r.imag_residue_max = read_number(j.at("imag_residue_max"));
  r.wallclock = read_number(j.at("wallclock"));
  p.trace.energy = read_array(j.at("energy"));
  p.trace.mass = read_array(j.at("mass"));
  p.config = j.at("config").get<ConfigEcho>();
  return p;
}

}  // namespace pint
