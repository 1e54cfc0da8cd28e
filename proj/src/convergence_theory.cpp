#include "pint/convergence_theory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pint {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_half(double alpha) {
  if (!(std::abs(alpha) < 0.5)) throw std::domain_error("the bound needs |alpha| < 1/2");
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::domain_error(std::string(what) + " must be positive");
}

// Factor built on exp(exponent); the amplifying regime keeps the prefactor.
Bound exponential_bound(double alpha, double exponent) {
  if (exponent > 0.0) {
    Bound b = contraction(alpha, std::exp(exponent), "amplifying");
    b.prefactor = std::exp(exponent);
    return b;
  }
  return contraction(alpha, 1.0, "decaying");
}

}  // namespace

Bound contraction(double alpha, double x, std::string regime) {
  Bound b;
  b.regime = std::move(regime);
  const double ax = std::abs(alpha) * x;
  if (!(ax < 1.0)) {
    b.rho = kInf;
    b.valid = false;
    return b;
  }
  b.rho = ax / (1.0 - ax);
  return b;
}

double rho_discrete_simple(double alpha) {
  require_half(alpha);
  return std::abs(alpha) / (1.0 - std::abs(alpha));
}

Bound rho_biharmonic_continuous(double alpha, double t_final, double omega_min, std::optional<double> xi_min) {
  if (t_final < 0.0) throw std::domain_error("T must be non-negative");
  double w = std::pow(omega_min, 4);
  if (xi_min) w += std::pow(*xi_min, 4);
  return contraction(alpha, std::exp(-w * t_final), "continuous");
}

Bound rho_linch_continuous(double alpha, double t_final, double epsilon, double beta, int dim) {
  require_half(alpha);
  require_positive(epsilon, "epsilon");
  if (t_final < 0.0) throw std::domain_error("T must be non-negative");
  const double eps2 = epsilon * epsilon;
  const double z_star = beta * beta * std::sqrt(t_final) / (2.0 * eps2);
  const double g_star = -eps2 * z_star * z_star + beta * beta * std::sqrt(t_final) * z_star;
  return exponential_bound(alpha, dim * g_star);
}

Bound rho_linch_semidiscrete(double alpha, double t_final, double epsilon, double beta) {
  require_half(alpha);
  require_positive(epsilon, "epsilon");
  require_positive(t_final, "T");
  const double eps2 = epsilon * epsilon;
  const double z_star = -beta * beta * t_final / (2.0 * eps2);
  const double g_star = eps2 / t_final * z_star * z_star + beta * beta * z_star;
  return exponential_bound(alpha, -g_star);
}

double stability_function(double theta, double z) { return (1.0 - (1.0 - theta) * z) / (1.0 + theta * z); }

Bound rho_linch_fully_discrete(double alpha, double dt, int n_t, double epsilon, double beta, double theta) {
  require_positive(dt, "dt");
  require_positive(epsilon, "epsilon");
  if (n_t < 1) throw std::domain_error("n_t must be positive");
  const double eps2 = epsilon * epsilon;
  const double z_star = beta * beta * dt / (2.0 * eps2);
  const double phi = -beta * beta * z_star + eps2 / dt * z_star * z_star;
  const double r = stability_function(theta, phi);
  // |R|^{n_t} in the log domain; the sign only matters through |alpha R^n_t|.
  const double power = std::exp(n_t * std::log(std::abs(r)));
  Bound b = contraction(alpha, power, phi < 0.0 ? "amplifying" : "decaying");
  return b;
}

double ch_c1(double l, double dt, int n_t) {
  return std::exp(-0.5 * n_t * std::log1p(2.0 * l * dt));
}

ChConstants ch_constants(double m, double epsilon, double t_final, double h, int n_x, double dt, int n_t,
                         std::optional<double> alpha) {
  require_positive(epsilon, "epsilon");
  require_positive(h, "h");
  if (n_x < 1) throw std::domain_error("n_x must be positive");
  const double eps2 = epsilon * epsilon;
  ChConstants c;
  c.c_star = m / 2.0 + m * m / (8.0 * eps2);
  if (alpha) {
    const Bound g = contraction(*alpha, std::exp(c.c_star * t_final));
    c.gamma = g.rho;
  }
  const double h2 = h * h;
  c.l = 16.0 * eps2 / (std::sqrt(static_cast<double>(n_x)) * h2 * h2) - 4.0 * m / h2;
  c.l_valid = c.l > 0.0;
  c.mesh_condition = m == 0.0 || std::pow(h, 1.5) < 4.0 * eps2 / m;
  c.c1 = c.l_valid ? ch_c1(c.l, dt, n_t) : kInf;
  return c;
}

Bound rho_ch_semidiscrete(double alpha, double l, double t_final) {
  if (!(std::abs(alpha) < 1.0)) throw std::domain_error("the bound needs |alpha| < 1");
  if (l < 0.0) throw std::domain_error("L must be non-negative");
  return contraction(alpha, std::exp(-l * t_final), "semidiscrete");
}

Bound rho_ch_fully_discrete(double alpha, double l, double dt, int n_t) {
  if (l < 0.0) throw std::domain_error("L must be non-negative");
  return contraction(alpha, ch_c1(l, dt, n_t), "fully discrete");
}

int predicted_iterations(const Bound& b, double initial_error, double tol) {
  if (!b.valid || !(b.rho < 1.0)) return -1;
  if (initial_error <= tol) return 0;
  if (b.rho == 0.0) return 1;
  return static_cast<int>(std::ceil(std::log(tol / initial_error) / std::log(b.rho)));
}

}  // namespace pint
