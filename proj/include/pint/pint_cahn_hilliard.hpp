#pragma once

#include <optional>
#include <vector>

#include "pint/circulant.hpp"
#include "pint/common.hpp"
#include "pint/diagnostics.hpp"
#include "pint/pint_linear.hpp"
#include "pint/reference_steppers.hpp"
#include "pint/spatial_ops.hpp"

namespace pint {

/// PintI: fully implicit all-at-once system. PintII: convex splitting, with
/// the explicit Laplacian term coupled through C3.
enum class ChVariant { PintI, PintII };

/// Printed: the averaged Jacobian uses (3u)^2. Analytic: 3u^2.
enum class JacobianForm { Printed, Analytic };

[[nodiscard]] const char* to_string(ChVariant v);

struct NonlinearAllAtOnce {
  ChVariant variant = ChVariant::PintI;
  const GridLaplacian* lap = nullptr;
  double epsilon = 0.1;
  AlphaCirculant ac;
  DiagonalizationData diag;

  NonlinearAllAtOnce(ChVariant v, const GridLaplacian& l, double eps, const AlphaCirculant& a,
                     TransformBackend backend = TransformBackend::Auto);
  [[nodiscard]] int n_dof() const { return static_cast<int>(lap->lap.rows()); }
  [[nodiscard]] int n_t() const { return ac.n_t; }
};

/// Blockwise cube.
[[nodiscard]] BlockMatrix nonlinear_term(const BlockMatrix& u);

/// PintI: block 1 = (u0 - alpha u_prev_final) / dt.
/// PintII: block 1 = (I/dt - lap)(u0 - alpha u_prev_final).
[[nodiscard]] BlockMatrix build_ch_rhs(const NonlinearAllAtOnce& sys, const Vector& u0, const Vector& u_prev_final);

/// (C1 (x) I)U - (I (x) lap) U^3 + (I (x) lap) U + eps^2 (I (x) lap^2) U - b.
[[nodiscard]] BlockMatrix residual_G(const NonlinearAllAtOnce& sys, const BlockMatrix& u, const BlockMatrix& b);
/// (C1 (x) I)U - (I (x) lap) U^3 + (C3 (x) lap) U + eps^2 (I (x) lap^2) U - b0.
[[nodiscard]] BlockMatrix residual_Q(const NonlinearAllAtOnce& sys, const BlockMatrix& u, const BlockMatrix& b0);
/// residual_G or residual_Q according to the variant.
[[nodiscard]] BlockMatrix residual(const NonlinearAllAtOnce& sys, const BlockMatrix& u, const BlockMatrix& b);

/// Sum of the absolute values of the terms of the residual, entrywise; the
/// denominator of the componentwise backward error.
[[nodiscard]] BlockMatrix residual_scale(const NonlinearAllAtOnce& sys, const BlockMatrix& u, const BlockMatrix& b);

/// Entry i: mean over n of (3 u_n^i)^2 (Printed) or 3 (u_n^i)^2 (Analytic).
[[nodiscard]] Vector averaged_jacobian(const BlockMatrix& u, JacobianForm form = JacobianForm::Printed);

struct QuasiNewtonOptions {
  double inner_tol = 1e-12;
  int inner_max = 50;
  JacobianForm jacobian = JacobianForm::Printed;
  SolverOptions solver;
};

struct QuasiNewtonResult {
  BlockMatrix u;
  int iterations = 0;
  bool converged = false;
  double imag_residue_max = 0.0;
  std::vector<double> residual_history;  // l2 norm of the residual, m = 0, 1, ...
};

/// U_m = U_{m-1} - J~^{-1} G(U_{m-1}) with the time-averaged Jacobian, each
/// linear system solved by the three-step diagonalization. Stops when the
/// residual norm is below inner_tol, when the componentwise backward error
/// reaches roundoff, or when the update is below inner_tol relative to U.
/// Throws ConvergenceError when the residual grows three times in a row.
[[nodiscard]] QuasiNewtonResult quasi_newton_solve(const NonlinearAllAtOnce& sys, const BlockMatrix& b,
                                                   const BlockMatrix& u_init, const QuasiNewtonOptions& opts = {});

struct ChPintConfig {
  PintConfig pint;
  QuasiNewtonOptions inner;
};

[[nodiscard]] ConvergenceReport run_pint_ch(ChVariant variant, const ChProblem& problem, const GridLaplacian& lap,
                                            const TimeGrid& grid, const ChPintConfig& cfg, const Vector& u0,
                                            const Trajectory& reference,
                                            const std::optional<BlockMatrix>& initial_guess = std::nullopt,
                                            BlockMatrix* final_iterate = nullptr);

}  // namespace pint
