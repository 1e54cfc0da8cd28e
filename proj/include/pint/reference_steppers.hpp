#pragma once

#include <algorithm>
#include <vector>

#include "pint/common.hpp"
#include "pint/spatial_ops.hpp"

namespace pint {

struct TimeGrid {
  double t_final = 0.0;
  double dt = 0.0;
  int n_t = 0;

  /// n_t = T / dt, rejected unless integral to 1e-12 relative.
  static TimeGrid from(double t_final, double dt);
  [[nodiscard]] double time(int n) const { return n * dt; }
};

/// States u_0 .. u_{n_t}; u_0 is the initial condition.
struct Trajectory {
  std::vector<Vector> states;
  TimeGrid grid;

  [[nodiscard]] int n_dof() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
  /// u_1 .. u_{n_t} as columns, the layout of the all-at-once unknown.
  [[nodiscard]] BlockMatrix blocks() const;
  static Trajectory from_blocks(const Vector& u0, const BlockMatrix& blocks, const TimeGrid& grid);
};

/// f(u) = u^3 - u, F(u) = (u^2 - 1)^2 / 4.
struct ChProblem {
  double epsilon = 0.1;
  double u_max = 2.0;

  [[nodiscard]] static double f(double u) { return u * u * u - u; }
  [[nodiscard]] static double f_prime(double u) { return 3.0 * u * u - 1.0; }
  [[nodiscard]] static double potential(double u) {
    const double s = u * u - 1.0;
    return 0.25 * s * s;
  }
  /// max |f'| on [-u_max, u_max].
  [[nodiscard]] double lipschitz_bound() const { return std::max(1.0, 3.0 * u_max * u_max - 1.0); }
};

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 25;
};

/// Solves (I + theta dt A) u_next = (I - (1 - theta) dt A) u_prev.
[[nodiscard]] Vector theta_step(const SpatialOperator& op, double theta, double dt, const Vector& u_prev);

/// Factorizes I + theta dt A once for repeated steps.
class ThetaStepper {
 public:
  ThetaStepper(const SpatialOperator& op, double theta, double dt);
  [[nodiscard]] Vector step(const Vector& u_prev) const;

 private:
  const SpatialOperator* op_;
  double theta_;
  double dt_;
  ShiftedFactor factor_;
};

[[nodiscard]] Trajectory solve_linear_sequential(const SpatialOperator& op, double theta,
                                                 const TimeGrid& grid, const Vector& u0);

/// Fully implicit step: u - u_prev - dt (lap f(u) - eps^2 lap^2 u) = 0.
[[nodiscard]] Vector ch_implicit_step(const GridLaplacian& lap, const ChProblem& prob, double dt,
                                      const Vector& u_prev, const NewtonOptions& opts = {});

/// Convex-splitting step, scaled by dt:
/// u + dt eps^2 lap^2 u - dt lap u^3 - u_prev + dt lap u_prev = 0.
[[nodiscard]] Vector ch_eyre_step(const GridLaplacian& lap, const ChProblem& prob, double dt,
                                  const Vector& u_prev, const NewtonOptions& opts = {});

[[nodiscard]] Trajectory solve_ch_implicit_sequential(const GridLaplacian& lap, const ChProblem& prob,
                                                      const TimeGrid& grid, const Vector& u0,
                                                      const NewtonOptions& opts = {});
[[nodiscard]] Trajectory solve_ch_eyre_sequential(const GridLaplacian& lap, const ChProblem& prob,
                                                  const TimeGrid& grid, const Vector& u0,
                                                  const NewtonOptions& opts = {});

/// Largest componentwise ratio |r_i| / scale_i (scale_i = 0 entries count only
/// when r_i != 0). Used as the attainable-accuracy stopping test.
[[nodiscard]] double componentwise_backward_error(const Eigen::Ref<const Vector>& r,
                                                  const Eigen::Ref<const Vector>& scale);

/// |M| as a sparse matrix with absolute values.
[[nodiscard]] SparseMatrix abs_matrix(const SparseMatrix& m);

}  // namespace pint
