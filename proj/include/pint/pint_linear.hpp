#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "pint/circulant.hpp"
#include "pint/common.hpp"
#include "pint/diagnostics.hpp"
#include "pint/reference_steppers.hpp"
#include "pint/spatial_ops.hpp"

namespace pint {

struct SolverOptions {
  int workers = 1;
  TransformBackend backend = TransformBackend::Auto;
  /// Keep the Step-(2) factorizations between solves while they fit.
  std::size_t factor_cache_bytes = std::size_t{512} << 20;
};

/// Solves sum_j (C_j (x) M_j) U = rhs through the three steps: transform,
/// n_t independent shifted solves (sigma_n I + tau_n B + K), back transform.
/// sigma and tau are eigenvalue sequences of alpha-circulants with real first
/// columns, so index n_t - n carries the conjugate shift of index n and only
/// half of the solves are done for a real right-hand side.
class AllAtOnceSolver {
 public:
  AllAtOnceSolver(const DiagonalizationData& diag, CVector sigma, CVector tau,
                  std::shared_ptr<const ShiftedSystems> family, SolverOptions opts = {});
  /// Step (2) in the eigenbasis of `op` (B = A, no K): each shifted system is
  /// diagonal there. `op` must outlive the solver.
  AllAtOnceSolver(const DiagonalizationData& diag, CVector sigma, CVector tau, const SpatialOperator& op,
                  SolverOptions opts = {});

  /// imag_residue (optional) receives max |Im U| / max |U|.
  [[nodiscard]] BlockMatrix solve(const BlockMatrix& rhs, double* imag_residue = nullptr);
  /// Modal constructor only: rhs and result are in the eigenbasis of `op`.
  [[nodiscard]] BlockMatrix solve_modal(const BlockMatrix& rhs, double* imag_residue = nullptr);

  [[nodiscard]] bool caches_factors() const { return cache_enabled_; }

 private:
  void factorize(int n, ShiftedFactor& f) const;
  void solve_column(int n, ShiftedFactor& scratch, Eigen::Ref<CVector> col);
  void check_rhs(const BlockMatrix& rhs) const;
  [[nodiscard]] BlockMatrix transform_and_solve(const BlockMatrix& rhs, double* imag_residue);
  [[nodiscard]] int size() const;

  const DiagonalizationData* diag_;
  CVector sigma_;
  CVector tau_;
  std::shared_ptr<const ShiftedSystems> family_;
  const SpatialOperator* modal_ = nullptr;
  SolverOptions opts_;
  bool cache_enabled_ = false;
  std::vector<ShiftedFactor> cache_;
  std::vector<char> cached_;
};

/// Block 1 = (I/dt - (1 - theta) A)(u0 - alpha u_prev_final); other blocks zero.
[[nodiscard]] BlockMatrix build_rhs(const Vector& u0, const Vector& u_prev_final, double alpha, double dt,
                                    double theta, const SpatialOperator& op, int n_t);

/// (C1 (x) I + C2 (x) A) U.
[[nodiscard]] BlockMatrix apply_all_at_once(const SpatialOperator& op, const AlphaCirculant& ac,
                                            const BlockMatrix& u);

/// Columnwise change of basis to and from the eigenbasis of `op`.
[[nodiscard]] BlockMatrix to_modal_blocks(const SpatialOperator& op, const BlockMatrix& u);
[[nodiscard]] BlockMatrix from_modal_blocks(const SpatialOperator& op, const BlockMatrix& u);

/// As solve_refined, with rhs and result in the eigenbasis of `op`.
[[nodiscard]] BlockMatrix solve_refined_modal(AllAtOnceSolver& solver, const SpatialOperator& op,
                                              const AlphaCirculant& ac, const BlockMatrix& rhs, int refinements,
                                              double* imag_residue = nullptr);

/// Three-step solve followed by `refinements` correction sweeps whose
/// residual is taken per spatial mode. `solver` must use the modal constructor.
[[nodiscard]] BlockMatrix solve_refined(AllAtOnceSolver& solver, const SpatialOperator& op, const AlphaCirculant& ac,
                                        const BlockMatrix& rhs, int refinements, double* imag_residue = nullptr);

struct SweepResult {
  BlockMatrix u;
  double imag_residue = 0.0;
};

[[nodiscard]] SweepResult pint_sweep(const SpatialOperator& op, const DiagonalizationData& diag,
                                     const BlockMatrix& rhs, const SolverOptions& opts = {});

inline constexpr long kDirectSolveCap = 20000;

/// Assembles the all-at-once matrix as a sparse Kronecker sum and solves it
/// with sparse LU; independent of the diagonalization.
[[nodiscard]] BlockMatrix solve_direct(const SpatialOperator& op, const AlphaCirculant& ac,
                                       const BlockMatrix& rhs, long cap = kDirectSolveCap);

struct PintConfig {
  double alpha = 1e-3;
  double tol = 1e-10;
  int max_iter = 50;
  NormKind norm_kind = NormKind::LinfL2;
  std::uint64_t seed = 42;
  int refinements = 1;  // modal correction sweeps per iteration
  SolverOptions solver;
};

/// U^0 with entries i.i.d. uniform on [-1, 1].
[[nodiscard]] BlockMatrix random_initial_guess(int n_dof, int n_t, std::uint64_t seed);

/// Error of `u` against states 1..n_t of `reference` in the eigenbasis of A.
[[nodiscard]] double modal_error(const SpatialOperator& op, const BlockMatrix& u, const Trajectory& reference,
                                 NormKind kind);

/// Waveform relaxation with the periodic-like initial condition. When
/// `initial_guess` is empty a seeded random guess is used; `final_iterate`
/// receives the last iterate.
[[nodiscard]] ConvergenceReport run_pint_linear(const SpatialOperator& op, double theta, const TimeGrid& grid,
                                                const PintConfig& cfg, const Vector& u0,
                                                const Trajectory& reference,
                                                const std::optional<BlockMatrix>& initial_guess = std::nullopt,
                                                BlockMatrix* final_iterate = nullptr);

}  // namespace pint
