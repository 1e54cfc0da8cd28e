#include "pint/pint_cahn_hilliard.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "pint/log.hpp"

namespace pint {
namespace {

void check_shape(const NonlinearAllAtOnce& sys, const BlockMatrix& m, const char* what) {
  if (m.rows() != sys.n_dof() || m.cols() != sys.n_t()) {
    std::ostringstream msg;
    msg << what << " is " << m.rows() << " x " << m.cols() << ", expected " << sys.n_dof() << " x " << sys.n_t();
    throw ShapeError(msg.str());
  }
}

}  // namespace

const char* to_string(ChVariant v) { return v == ChVariant::PintI ? "PintI" : "PintII"; }

NonlinearAllAtOnce::NonlinearAllAtOnce(ChVariant v, const GridLaplacian& l, double eps, const AlphaCirculant& a,
                                       TransformBackend backend)
    : variant(v), lap(&l), epsilon(eps), ac(a), diag(diagonalize(a, backend)) {
  if (eps <= 0.0) throw std::invalid_argument("epsilon must be positive");
}

BlockMatrix nonlinear_term(const BlockMatrix& u) { return u.array().cube().matrix(); }

BlockMatrix build_ch_rhs(const NonlinearAllAtOnce& sys, const Vector& u0, const Vector& u_prev_final) {
  if (u0.size() != sys.n_dof() || u_prev_final.size() != sys.n_dof()) {
    throw ShapeError("build_ch_rhs: vectors must have length n_dof");
  }
  const Vector v = u0 - sys.ac.alpha * u_prev_final;
  BlockMatrix b = BlockMatrix::Zero(sys.n_dof(), sys.n_t());
  b.col(0) = v / sys.ac.dt;
  if (sys.variant == ChVariant::PintII) b.col(0) -= sys.lap->lap * v;
  return b;
}

namespace {

ExtBlockMatrix apply_circulant_ext(const Vector& first_col, double alpha, const ExtBlockMatrix& u) {
  const auto n = first_col.size();
  ExtBlockMatrix out = ExtBlockMatrix::Zero(u.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const long double c = first_col(k);
    if (c == 0.0L) continue;
    for (Eigen::Index col = 0; col < n; ++col) {
      const Eigen::Index src = col - k;
      if (src >= 0) {
        out.col(col) += c * u.col(src);
      } else {
        out.col(col) += (static_cast<long double>(alpha) * c) * u.col(src + n);
      }
    }
  }
  return out;
}

// Formed in extended precision: in double, eps^2 lap^2 U alone leaves noise
// that the time coupling accumulates into a stall well above roundoff in U.
BlockMatrix residual_ext(const NonlinearAllAtOnce& sys, const BlockMatrix& u, const BlockMatrix& b, bool c3_coupling) {
  check_shape(sys, u, "U");
  check_shape(sys, b, "b");
  const ExtSparseMatrix lap = sys.lap->lap.cast<long double>();
  const ExtSparseMatrix lap_sq = sys.lap->lap_sq.cast<long double>();
  const long double eps2 = static_cast<long double>(sys.epsilon) * sys.epsilon;
  const ExtBlockMatrix ue = u.cast<long double>();
  const ExtBlockMatrix cube = ue.array().cube().matrix();
  const ExtBlockMatrix coupled = c3_coupling ? apply_circulant_ext(sys.ac.first_col_c3(), sys.ac.alpha, ue) : ue;
  const ExtBlockMatrix r = apply_circulant_ext(sys.ac.first_col_c1, sys.ac.alpha, ue) - lap * cube + lap * coupled +
                           eps2 * (lap_sq * ue) - b.cast<long double>();
  return r.cast<double>();
}

}  // namespace

BlockMatrix residual_G(const NonlinearAllAtOnce& sys, const BlockMatrix& u, const BlockMatrix& b) {
  return residual_ext(sys, u, b, false);
}

BlockMatrix residual_Q(const NonlinearAllAtOnce& sys, const BlockMatrix& u, const BlockMatrix& b0) {
  return residual_ext(sys, u, b0, true);
}

BlockMatrix residual(const NonlinearAllAtOnce& sys, const BlockMatrix& u, const BlockMatrix& b) {
  return sys.variant == ChVariant::PintI ? residual_G(sys, u, b) : residual_Q(sys, u, b);
}

BlockMatrix residual_scale(const NonlinearAllAtOnce& sys, const BlockMatrix& u, const BlockMatrix& b) {
  const double eps2 = sys.epsilon * sys.epsilon;
  const SparseMatrix abs_lap = abs_matrix(sys.lap->lap);
  const SparseMatrix abs_lap_sq = abs_matrix(sys.lap->lap_sq);
  const BlockMatrix au = u.cwiseAbs();
  const Vector c1 = sys.ac.first_col_c1.cwiseAbs();
  BlockMatrix s = apply_circulant(c1, sys.ac.alpha, au) + abs_lap * nonlinear_term(au) + eps2 * (abs_lap_sq * au) +
                  b.cwiseAbs();
  if (sys.variant == ChVariant::PintI) {
    s += abs_lap * au;
  } else {
    s += abs_lap * apply_circulant(sys.ac.first_col_c3(), sys.ac.alpha, au);
  }
  return s;
}

Vector averaged_jacobian(const BlockMatrix& u, JacobianForm form) {
  if (u.cols() == 0) return Vector::Zero(u.rows());
  const double factor = form == JacobianForm::Printed ? 9.0 : 3.0;
  return factor * u.cwiseAbs2().rowwise().mean();
}

QuasiNewtonResult quasi_newton_solve(const NonlinearAllAtOnce& sys, const BlockMatrix& b, const BlockMatrix& u_init,
                                     const QuasiNewtonOptions& opts) {
  if (!(opts.inner_tol > 0.0)) throw std::invalid_argument("inner_tol must be positive");
  if (opts.inner_max < 0) throw std::invalid_argument("inner_max must be non-negative");
  check_shape(sys, u_init, "initial iterate");

  const double eps2 = sys.epsilon * sys.epsilon;
  const SparseMatrix& lap = sys.lap->lap;
  SolverOptions solver_opts = opts.solver;
  solver_opts.factor_cache_bytes = 0;  // the shifts change every iteration

  QuasiNewtonResult res;
  res.u = u_init;
  int growth = 0;
  bool small_update = false;
  for (int m = 0;; ++m) {
    const BlockMatrix g = residual(sys, res.u, b);
    const double norm = g.norm();
    res.residual_history.push_back(norm);
    res.iterations = m;
    if (!std::isfinite(norm)) {
      throw ConvergenceError("quasi-Newton residual is not finite", norm);
    }
    // A componentwise backward-error test is too loose here: its scale is
    // dominated by |eps^2 lap^2| |U| and it fires before the smooth modes settle.
    if (small_update || norm <= opts.inner_tol) {
      res.converged = true;
      return res;
    }
    if (m > 0 && norm > res.residual_history[m - 1]) {
      if (++growth >= 3) {
        std::ostringstream msg;
        msg << "quasi-Newton diverged; residual history:";
        for (double r : res.residual_history) msg << ' ' << r;
        throw ConvergenceError(msg.str(), norm);
      }
    } else {
      growth = 0;
    }
    if (m == opts.inner_max) return res;

    const Vector jac = averaged_jacobian(res.u, opts.jacobian);
    const SparseMatrix lap_j = lap * jac.asDiagonal();
    double imag = 0.0;
    BlockMatrix delta;
    if (sys.variant == ChVariant::PintI) {
      // lambda_1 I + (-lap J + lap + eps^2 lap^2)
      SparseMatrix k = SparseMatrix(lap - lap_j) + eps2 * sys.lap->lap_sq;
      AllAtOnceSolver solver(sys.diag, sys.diag.eigs_c1, CVector::Ones(sys.n_t()),
                             std::make_shared<ShiftedFamily>(k, SparseMatrix()), solver_opts);
      delta = solver.solve(-g, &imag);
    } else {
      // lambda_1 I + lambda_3 lap + (-lap J + eps^2 lap^2)
      SparseMatrix k = eps2 * sys.lap->lap_sq - lap_j;
      AllAtOnceSolver solver(sys.diag, sys.diag.eigs_c1, sys.diag.eigs_c3, std::make_shared<ShiftedFamily>(lap, k), solver_opts);
      delta = solver.solve(-g, &imag);
    }
    res.imag_residue_max = std::max(res.imag_residue_max, imag);
    res.u += delta;
    small_update = delta.lpNorm<Eigen::Infinity>() <=
                   opts.inner_tol * std::max(1.0, res.u.lpNorm<Eigen::Infinity>());
  }
}

ConvergenceReport run_pint_ch(ChVariant variant, const ChProblem& problem, const GridLaplacian& lap,
                              const TimeGrid& grid, const ChPintConfig& cfg, const Vector& u0,
                              const Trajectory& reference, const std::optional<BlockMatrix>& initial_guess,
                              BlockMatrix* final_iterate) {
  const auto start = std::chrono::steady_clock::now();
  const PintConfig& pc = cfg.pint;
  if (pc.tol <= 0.0) throw std::invalid_argument("tol must be positive");
  if (pc.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  const int nd = static_cast<int>(lap.lap.rows());
  if (u0.size() != nd) throw ShapeError("initial condition length does not match n_dof");
  if (reference.states.size() != static_cast<std::size_t>(grid.n_t) + 1) {
    throw ShapeError("reference trajectory must have n_t + 1 states");
  }

  const AlphaCirculant ac = build_circulants(grid.n_t, pc.alpha, grid.dt, 1.0, true);
  const NonlinearAllAtOnce sys(variant, lap, problem.epsilon, ac, pc.solver.backend);
  const SpatialOperator modal_basis(OperatorKind::LaplacianOnly, lap, {});
  QuasiNewtonOptions inner = cfg.inner;
  inner.solver = pc.solver;

  BlockMatrix u = initial_guess ? *initial_guess : random_initial_guess(nd, grid.n_t, pc.seed);
  check_shape(sys, u, "initial guess");
  const BlockMatrix ref_blocks = reference.blocks();

  ConvergenceReport report;
  report.norm_kind = pc.norm_kind;
  report.tol = pc.tol;
  report.initial_error = block_error(u - ref_blocks, pc.norm_kind, lap.grid);
  for (int k = 1; k <= pc.max_iter; ++k) {
    const BlockMatrix b = build_ch_rhs(sys, u0, u.col(grid.n_t - 1));
    QuasiNewtonResult qn;
    try {
      qn = quasi_newton_solve(sys, b, u, inner);
    } catch (const ConvergenceError& e) {
      warn(std::string("outer iteration ") + std::to_string(k) + ": " + e.what());
      break;
    }
    u = qn.u;
    report.inner_iterations.push_back(qn.iterations);
    report.imag_residue_max = std::max(report.imag_residue_max, qn.imag_residue_max);
    const double err = block_error(u - ref_blocks, pc.norm_kind, lap.grid);
    report.errors.push_back(err);
    report.modal_errors.push_back(modal_error(modal_basis, u, reference, pc.norm_kind));
    report.iterations = k;
    if (!std::isfinite(err)) break;
    if (err <= pc.tol) {
      report.converged = true;
      break;
    }
  }
  if (final_iterate) *final_iterate = u;
  report.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace pint
