#include "pint/reference_steppers.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "pint/log.hpp"

namespace pint {
namespace {

// Below this componentwise backward error the residual is at roundoff level.
constexpr double kRoundoffBackwardError = 4e-16;

SparseMatrix identity(int n) {
  SparseMatrix i(n, n);
  i.setIdentity();
  return i;
}

void check_length(const Vector& v, int n, const char* what) {
  if (v.size() != n) {
    std::ostringstream msg;
    msg << what << ": expected length " << n << ", got " << v.size();
    throw ShapeError(msg.str());
  }
}

enum class ChScheme { Implicit, Eyre };

class ChStepper {
 public:
  ChStepper(const GridLaplacian& lap, const ChProblem& prob, double dt, ChScheme scheme)
      : lap_(lap), eps2_(prob.epsilon * prob.epsilon), dt_(dt), scheme_(scheme),
        abs_lap_(abs_matrix(lap.lap)), abs_lap_sq_(abs_matrix(lap.lap_sq)),
        base_(identity(static_cast<int>(lap.lap.rows())) + (dt * eps2_) * lap.lap_sq),
        lap_ext_(lap.lap.cast<long double>()), lap_sq_ext_(lap.lap_sq.cast<long double>()) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (prob.epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
    const int bw = std::max(pint::bandwidth(lap.lap), pint::bandwidth(lap.lap_sq));
    lu_ = BandLU<double>(static_cast<int>(lap.lap.rows()), bw, bw);
  }

  Vector step(const Vector& u_prev, const NewtonOptions& opts) {
    check_length(u_prev, static_cast<int>(lap_.lap.rows()), "CH step");
    // Explicit part of the residual, fixed over the Newton loop.
    const ExtVector prev_ext = u_prev.cast<long double>();
    ExtVector fixed = -prev_ext;
    Vector fixed_scale = u_prev.cwiseAbs();
    if (scheme_ == ChScheme::Eyre) {
      fixed += static_cast<long double>(dt_) * (lap_ext_ * prev_ext);
      fixed_scale += dt_ * (abs_lap_ * u_prev.cwiseAbs());
    }

    Vector u = u_prev;
    Vector r(u.size()), scale(u.size()), nonlinear(u.size());
    double rnorm = std::numeric_limits<double>::infinity();
    for (int m = 0;; ++m) {
      // The residual is formed in extended precision: in double, the dt eps^2
      // lap^2 term alone leaves noise that accumulates over many steps.
      const ExtVector ue = u.cast<long double>();
      ExtVector ne = ue.array().cube().matrix();
      if (scheme_ == ChScheme::Implicit) ne -= ue;
      nonlinear = ne.cast<double>();
      const long double dt = dt_;
      const ExtVector re = ue + (dt * static_cast<long double>(eps2_)) * (lap_sq_ext_ * ue) - dt * (lap_ext_ * ne) + fixed;
      r = re.cast<double>();
      rnorm = r.norm();
      if (!std::isfinite(rnorm)) break;
      scale = u.cwiseAbs() + (dt_ * eps2_) * (abs_lap_sq_ * u.cwiseAbs()) +
              dt_ * (abs_lap_ * nonlinear.cwiseAbs()) + fixed_scale;
      if (rnorm <= opts.tol || componentwise_backward_error(r, scale) <= kRoundoffBackwardError) {
        return u;
      }
      if (m == opts.max_iter) break;

      Vector slope(u.size());
      if (scheme_ == ChScheme::Implicit) {
        slope = u.unaryExpr([](double x) { return ChProblem::f_prime(x); });
      } else {
        slope = (3.0 * u.array().square()).matrix();
      }
      SparseMatrix jac = base_ - dt_ * (lap_.lap * slope.asDiagonal());
      lu_.assign(jac);
      if (lu_.factorize() >= 0) throw SingularSystemError("singular Newton Jacobian in CH step");
      Vector delta = -r;
      lu_.solve_in_place(delta);
      u += delta;
      if (delta.lpNorm<Eigen::Infinity>() <= opts.tol * std::max(1.0, u.lpNorm<Eigen::Infinity>())) {
        return u;
      }
    }
    std::ostringstream msg;
    msg << "Newton did not converge in " << opts.max_iter << " iterations (residual " << rnorm << ")";
    throw ConvergenceError(msg.str(), rnorm);
  }

 private:
  const GridLaplacian& lap_;
  double eps2_;
  double dt_;
  ChScheme scheme_;
  SparseMatrix abs_lap_;
  SparseMatrix abs_lap_sq_;
  SparseMatrix base_;  // I + dt eps^2 lap^2
  ExtSparseMatrix lap_ext_;
  ExtSparseMatrix lap_sq_ext_;
  BandLU<double> lu_;
};

Trajectory run_ch(const GridLaplacian& lap, const ChProblem& prob, const TimeGrid& grid, const Vector& u0,
                  const NewtonOptions& opts, ChScheme scheme) {
  if (scheme == ChScheme::Implicit && grid.dt > prob.epsilon * prob.epsilon) {
    warn("implicit CH step with dt > eps^2; energy decay is not guaranteed");
  }
  ChStepper stepper(lap, prob, grid.dt, scheme);
  Trajectory traj;
  traj.grid = grid;
  traj.states.reserve(grid.n_t + 1);
  traj.states.push_back(u0);
  for (int n = 0; n < grid.n_t; ++n) traj.states.push_back(stepper.step(traj.states.back(), opts));
  return traj;
}

}  // namespace

TimeGrid TimeGrid::from(double t_final, double dt) {
  if (!(t_final > 0.0) || !(dt > 0.0)) throw std::invalid_argument("T and dt must be positive");
  const double ratio = t_final / dt;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-12 * ratio) {
    std::ostringstream msg;
    msg << "T / dt = " << ratio << " is not an integer; choose dt = T / " << std::max(1.0, steps);
    throw std::invalid_argument(msg.str());
  }
  return TimeGrid{t_final, dt, static_cast<int>(steps)};
}

BlockMatrix Trajectory::blocks() const {
  if (states.size() < 2) return BlockMatrix(n_dof(), 0);
  BlockMatrix b(n_dof(), static_cast<Eigen::Index>(states.size() - 1));
  for (std::size_t n = 1; n < states.size(); ++n) b.col(static_cast<Eigen::Index>(n - 1)) = states[n];
  return b;
}

Trajectory Trajectory::from_blocks(const Vector& u0, const BlockMatrix& blocks, const TimeGrid& grid) {
  if (blocks.rows() != u0.size()) throw ShapeError("from_blocks: block length does not match u0");
  Trajectory t;
  t.grid = grid;
  t.states.reserve(blocks.cols() + 1);
  t.states.push_back(u0);
  for (Eigen::Index n = 0; n < blocks.cols(); ++n) t.states.emplace_back(blocks.col(n));
  return t;
}

double componentwise_backward_error(const Eigen::Ref<const Vector>& r, const Eigen::Ref<const Vector>& scale) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double a = std::abs(r(i));
    if (a == 0.0) continue;
    if (scale(i) == 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, a / scale(i));
  }
  return worst;
}

SparseMatrix abs_matrix(const SparseMatrix& m) { return m.cwiseAbs(); }

ThetaStepper::ThetaStepper(const SpatialOperator& op, double theta, double dt)
    : op_(&op), theta_(theta), dt_(dt) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  // Factored through the Laplacian: a direct LU of I + theta dt A loses
  // about cond(theta dt A) * eps in the smooth modes every step.
  LaplacianPolynomialFamily(op).factorize_into(factor_, Complex(1.0, 0.0), Complex(theta * dt, 0.0));
}

Vector ThetaStepper::step(const Vector& u_prev) const {
  check_length(u_prev, op_->n_dof(), "theta step");
  if (theta_ == 0.0) return u_prev - dt_ * op_->apply(u_prev);
  CVector x = u_prev.cast<Complex>();
  factor_.solve_in_place(x);
  if (theta_ == 1.0) return x.real();
  // (I + theta dt A)^{-1} (I - (1 - theta) dt A) = (R - (1 - theta) I) / theta with
  // R = (I + theta dt A)^{-1}; avoids the explicit product with dt A.
  return (x.real() - (1.0 - theta_) * u_prev) / theta_;
}

Vector theta_step(const SpatialOperator& op, double theta, double dt, const Vector& u_prev) {
  return ThetaStepper(op, theta, dt).step(u_prev);
}

Trajectory solve_linear_sequential(const SpatialOperator& op, double theta, const TimeGrid& grid,
                                   const Vector& u0) {
  check_length(u0, op.n_dof(), "initial condition");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");
  if (!(grid.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  // The theta method acts on each eigenmode of A as multiplication by
  // R(dt mu). Stepping the modal coefficients in extended precision keeps the
  // reference free of the per-step roundoff a physical-space solve collects.
  const auto& mu = op.spectrum();
  const std::size_t n = mu.size();
  const Vector c0 = op.to_modal(u0);
  std::vector<long double> c(n), r(n);
  for (std::size_t p = 0; p < n; ++p) {
    const long double z = static_cast<long double>(grid.dt) * mu[p];
    r[p] = (1.0L - (1.0L - theta) * z) / (1.0L + theta * z);
    c[p] = c0(static_cast<Eigen::Index>(p));
  }
  Trajectory traj;
  traj.grid = grid;
  traj.states.reserve(grid.n_t + 1);
  traj.states.push_back(u0);
  Vector step(static_cast<Eigen::Index>(n));
  for (int k = 0; k < grid.n_t; ++k) {
    for (std::size_t p = 0; p < n; ++p) {
      c[p] *= r[p];
      step(static_cast<Eigen::Index>(p)) = static_cast<double>(c[p]);
    }
    traj.states.push_back(op.from_modal(step));
  }
  return traj;
}

Vector ch_implicit_step(const GridLaplacian& lap, const ChProblem& prob, double dt, const Vector& u_prev,
                        const NewtonOptions& opts) {
  return ChStepper(lap, prob, dt, ChScheme::Implicit).step(u_prev, opts);
}

Vector ch_eyre_step(const GridLaplacian& lap, const ChProblem& prob, double dt, const Vector& u_prev,
                    const NewtonOptions& opts) {
  return ChStepper(lap, prob, dt, ChScheme::Eyre).step(u_prev, opts);
}

Trajectory solve_ch_implicit_sequential(const GridLaplacian& lap, const ChProblem& prob, const TimeGrid& grid,
                                        const Vector& u0, const NewtonOptions& opts) {
  return run_ch(lap, prob, grid, u0, opts, ChScheme::Implicit);
}

Trajectory solve_ch_eyre_sequential(const GridLaplacian& lap, const ChProblem& prob, const TimeGrid& grid,
                                    const Vector& u0, const NewtonOptions& opts) {
  return run_ch(lap, prob, grid, u0, opts, ChScheme::Eyre);
}

}  // namespace pint
