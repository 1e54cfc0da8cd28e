#pragma once

#include <optional>
#include <string>

namespace pint {

/// A per-iteration contraction factor. When the bound is vacuous (the
/// denominator is not positive) rho is +inf and valid is false.
struct Bound {
  double rho = 0.0;
  bool valid = true;
  std::string regime;
  /// k-independent factor in front of rho^k, where a bound has one.
  double prefactor = 1.0;
};

/// |a| x / (1 - |a| x), or an invalid Bound when |a| x >= 1.
[[nodiscard]] Bound contraction(double alpha, double x, std::string regime = "");

/// |alpha| / (1 - |alpha|); throws std::domain_error unless |alpha| < 1/2.
[[nodiscard]] double rho_discrete_simple(double alpha);

/// x = exp(-omega^4 T), or exp(-(omega^4 + xi^4) T) when xi_min is given.
[[nodiscard]] Bound rho_biharmonic_continuous(double alpha, double t_final, double omega_min,
                                              std::optional<double> xi_min = std::nullopt);

/// g(z) = -eps^2 z^2 + beta^2 sqrt(T) z, maximized at z* = beta^2 sqrt(T) / (2 eps^2).
/// dim = 2 uses g(z1) + g(z2), which doubles the exponent.
[[nodiscard]] Bound rho_linch_continuous(double alpha, double t_final, double epsilon, double beta, int dim = 1);

/// g(z) = eps^2 / T z^2 + beta^2 z, minimized at z* = -beta^2 T / (2 eps^2).
[[nodiscard]] Bound rho_linch_semidiscrete(double alpha, double t_final, double epsilon, double beta);

/// R_theta(z) = (1 - (1 - theta) z) / (1 + theta z).
[[nodiscard]] double stability_function(double theta, double z);

/// phi(z) = -beta^2 z + eps^2 / dt z^2 at z* = beta^2 dt / (2 eps^2); the power
/// R_theta(phi*)^{n_t} is formed in the log domain.
[[nodiscard]] Bound rho_linch_fully_discrete(double alpha, double dt, int n_t, double epsilon, double beta,
                                             double theta);

struct ChConstants {
  double c_star = 0.0;          // M/2 + M^2 / (8 eps^2)
  std::optional<double> gamma;  // |alpha| e^{C* T} / (1 - |alpha| e^{C* T}), +inf if vacuous
  double l = 0.0;               // 16 eps^2 / (sqrt(n_x) h^4) - 4 M / h^2
  bool l_valid = false;         // l > 0
  bool mesh_condition = false;  // h^{3/2} < 4 eps^2 / M
  double c1 = 1.0;              // sqrt((1 / (1 + 2 l dt))^{n_t})
};

[[nodiscard]] ChConstants ch_constants(double m, double epsilon, double t_final, double h, int n_x, double dt,
                                       int n_t, std::optional<double> alpha = std::nullopt);

/// C1 = sqrt((1 / (1 + 2 L dt))^{n_t}).
[[nodiscard]] double ch_c1(double l, double dt, int n_t);

[[nodiscard]] Bound rho_ch_semidiscrete(double alpha, double l, double t_final);
[[nodiscard]] Bound rho_ch_fully_discrete(double alpha, double l, double dt, int n_t);

/// Smallest k with rho^k e0 <= tol; -1 when rho >= 1 or the bound is vacuous.
[[nodiscard]] int predicted_iterations(const Bound& b, double initial_error, double tol);

}  // namespace pint
