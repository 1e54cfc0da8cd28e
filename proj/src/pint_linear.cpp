#include "pint/pint_linear.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/SparseLU>

#include "pint/parallel.hpp"

namespace pint {
namespace {

bool conjugate_paired(const CVector& v) {
  const auto n = v.size();
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  for (Eigen::Index l = 1; l < n; ++l) {
    if (std::abs(v(n - l) - std::conj(v(l))) > 1e-12 * scale) return false;
  }
  return std::abs(v(0).imag()) <= 1e-12 * scale;
}

}  // namespace

AllAtOnceSolver::AllAtOnceSolver(const DiagonalizationData& diag, CVector sigma, CVector tau,
                                 std::shared_ptr<const ShiftedSystems> family, SolverOptions opts)
    : diag_(&diag), sigma_(std::move(sigma)), tau_(std::move(tau)), family_(std::move(family)), opts_(opts) {
  if (sigma_.size() != diag.n_t || tau_.size() != diag.n_t) {
    throw ShapeError("AllAtOnceSolver: shift sequences must have n_t entries");
  }
  if (!family_) throw std::invalid_argument("AllAtOnceSolver: no shifted-system family");
  const std::size_t count = static_cast<std::size_t>(diag.n_t);
  cache_enabled_ = count * family_->factor_bytes() <= opts_.factor_cache_bytes;
  if (cache_enabled_) {
    cache_.resize(count);
    cached_.assign(count, 0);
  }
}

AllAtOnceSolver::AllAtOnceSolver(const DiagonalizationData& diag, CVector sigma, CVector tau,
                                 const SpatialOperator& op, SolverOptions opts)
    : diag_(&diag), sigma_(std::move(sigma)), tau_(std::move(tau)), modal_(&op), opts_(opts) {
  if (sigma_.size() != diag.n_t || tau_.size() != diag.n_t) {
    throw ShapeError("AllAtOnceSolver: shift sequences must have n_t entries");
  }
}

int AllAtOnceSolver::size() const { return modal_ ? modal_->n_dof() : family_->size(); }

void AllAtOnceSolver::solve_column(int n, ShiftedFactor& scratch, Eigen::Ref<CVector> col) {
  if (modal_) {
    // col already holds modal coefficients.
    const auto& mu = modal_->spectrum();
    for (Eigen::Index p = 0; p < col.size(); ++p) {
      const Complex d = sigma_(n) + tau_(n) * mu[static_cast<std::size_t>(p)];
      if (d == Complex(0.0, 0.0)) {
        std::ostringstream msg;
        msg << "Step-(2) system at time index " << n << ": singular shifted matrix with sigma = " << sigma_(n)
            << ", tau = " << tau_(n) << " (mode " << p << ")";
        throw SingularSystemError(msg.str());
      }
      col(p) /= d;
    }
    return;
  }
  ShiftedFactor* f = &scratch;
  if (cache_enabled_) {
    f = &cache_[static_cast<std::size_t>(n)];
    if (!cached_[static_cast<std::size_t>(n)]) {
      factorize(n, *f);
      cached_[static_cast<std::size_t>(n)] = 1;
    }
  } else {
    factorize(n, scratch);
  }
  f->solve_in_place(col);
}

void AllAtOnceSolver::factorize(int n, ShiftedFactor& f) const {
  try {
    family_->factorize_into(f, sigma_(n), tau_(n));
  } catch (const SingularSystemError& e) {
    std::ostringstream msg;
    msg << "Step-(2) system at time index " << n << ": " << e.what();
    throw SingularSystemError(msg.str());
  }
}

BlockMatrix AllAtOnceSolver::solve(const BlockMatrix& rhs, double* imag_residue) {
  check_rhs(rhs);
  if (!modal_) return transform_and_solve(rhs, imag_residue);
  const BlockMatrix u = solve_modal(to_modal_blocks(*modal_, rhs), imag_residue);
  return from_modal_blocks(*modal_, u);
}

BlockMatrix AllAtOnceSolver::solve_modal(const BlockMatrix& rhs, double* imag_residue) {
  if (!modal_) throw std::logic_error("solve_modal needs the modal constructor");
  check_rhs(rhs);
  return transform_and_solve(rhs, imag_residue);
}

void AllAtOnceSolver::check_rhs(const BlockMatrix& rhs) const {
  if (rhs.cols() != diag_->n_t || rhs.rows() != size()) {
    std::ostringstream msg;
    msg << "rhs is " << rhs.rows() << " x " << rhs.cols() << ", expected " << size() << " x " << diag_->n_t;
    throw ShapeError(msg.str());
  }
}

BlockMatrix AllAtOnceSolver::transform_and_solve(const BlockMatrix& rhs, double* imag_residue) {
  const int n_t = diag_->n_t;
  const int workers = std::max(1, opts_.workers);
  CBlockMatrix s = step1_transform(rhs.cast<Complex>(), diag_->gamma, opts_.backend, workers);

  // A real rhs gives conjugate-paired columns, so columns above n_t / 2
  // follow from the ones below.
  const bool paired = conjugate_paired(sigma_) && conjugate_paired(tau_);
  const int solves = paired ? n_t / 2 + 1 : n_t;
  parallel_chunks(workers, static_cast<std::size_t>(solves), [&](std::size_t b, std::size_t e) {
    ShiftedFactor scratch;
    for (std::size_t idx = b; idx < e; ++idx) {
      const int n = static_cast<int>(idx);
      solve_column(n, scratch, s.col(n));
    }
  });
  if (paired) {
    for (int n = solves; n < n_t; ++n) s.col(n) = s.col(n_t - n).conjugate();
  }

  const CBlockMatrix u = step3_transform(s, diag_->gamma, opts_.backend, workers);
  if (imag_residue) {
    const double re = u.size() ? u.real().cwiseAbs().maxCoeff() : 0.0;
    const double im = u.size() ? u.imag().cwiseAbs().maxCoeff() : 0.0;
    *imag_residue = re > 0.0 ? im / re : im;
  }
  return u.real();
}

BlockMatrix to_modal_blocks(const SpatialOperator& op, const BlockMatrix& u) {
  BlockMatrix out(u.rows(), u.cols());
  for (Eigen::Index n = 0; n < u.cols(); ++n) out.col(n) = op.to_modal(Vector(u.col(n)));
  return out;
}

BlockMatrix from_modal_blocks(const SpatialOperator& op, const BlockMatrix& u) {
  BlockMatrix out(u.rows(), u.cols());
  for (Eigen::Index n = 0; n < u.cols(); ++n) out.col(n) = op.from_modal(Vector(u.col(n)));
  return out;
}

BlockMatrix solve_refined_modal(AllAtOnceSolver& solver, const SpatialOperator& op, const AlphaCirculant& ac,
                                const BlockMatrix& b, int refinements, double* imag_residue) {
  // Every spatial mode is a scalar alpha-circulant system whose residual is
  // evaluated without the 1/alpha growth of the scaled transforms; a few
  // correction sweeps remove that growth.
  double imag = 0.0;
  BlockMatrix u = solver.solve_modal(b, &imag);
  double worst = imag;
  const Eigen::Map<const Vector> mu(op.spectrum().data(), static_cast<Eigen::Index>(op.spectrum().size()));
  for (int r = 0; r < refinements; ++r) {
    const BlockMatrix res = b - apply_circulant(ac.first_col_c1, ac.alpha, u) -
                            mu.asDiagonal() * apply_circulant(ac.first_col_c2, ac.alpha, u);
    u += solver.solve_modal(res, &imag);
    worst = std::max(worst, imag);
  }
  if (imag_residue) *imag_residue = worst;
  return u;
}

BlockMatrix solve_refined(AllAtOnceSolver& solver, const SpatialOperator& op, const AlphaCirculant& ac,
                          const BlockMatrix& rhs, int refinements, double* imag_residue) {
  return from_modal_blocks(op, solve_refined_modal(solver, op, ac, to_modal_blocks(op, rhs), refinements,
                                                   imag_residue));
}

BlockMatrix build_rhs(const Vector& u0, const Vector& u_prev_final, double alpha, double dt, double theta,
                      const SpatialOperator& op, int n_t) {
  if (u0.size() != op.n_dof() || u_prev_final.size() != op.n_dof()) {
    throw ShapeError("build_rhs: vectors must have length n_dof");
  }
  if (n_t < 1) throw ShapeError("build_rhs: n_t must be positive");
  const Vector v = u0 - alpha * u_prev_final;
  BlockMatrix b = BlockMatrix::Zero(op.n_dof(), n_t);
  b.col(0) = v / dt;
  if (theta < 1.0) b.col(0) -= (1.0 - theta) * op.apply_modal(v);
  return b;
}

BlockMatrix apply_all_at_once(const SpatialOperator& op, const AlphaCirculant& ac, const BlockMatrix& u) {
  if (u.rows() != op.n_dof()) throw ShapeError("apply_all_at_once: block length mismatch");
  const BlockMatrix au = op.matrix() * u;
  return apply_circulant(ac.first_col_c1, ac.alpha, u) + apply_circulant(ac.first_col_c2, ac.alpha, au);
}

SweepResult pint_sweep(const SpatialOperator& op, const DiagonalizationData& diag, const BlockMatrix& rhs,
                       const SolverOptions& opts) {
  SolverOptions o = opts;
  o.factor_cache_bytes = 0;
  AllAtOnceSolver solver(diag, diag.eigs_c1, diag.eigs_c2, op, o);
  SweepResult r;
  r.u = solver.solve(rhs, &r.imag_residue);
  return r;
}

BlockMatrix solve_direct(const SpatialOperator& op, const AlphaCirculant& ac, const BlockMatrix& rhs, long cap) {
  const int n_t = ac.n_t;
  const int nd = op.n_dof();
  if (rhs.rows() != nd || rhs.cols() != n_t) throw ShapeError("solve_direct: rhs shape mismatch");
  const long size = static_cast<long>(n_t) * nd;
  if (size > cap) {
    std::ostringstream msg;
    msg << "all-at-once system of size " << size << " exceeds the direct-solve cap " << cap;
    throw std::length_error(msg.str());
  }

  std::vector<Eigen::Triplet<double>> t;
  const SparseMatrix& a = op.matrix();
  auto add_block = [&](int bi, int bj, double scale, bool identity) {
    if (scale == 0.0) return;
    if (identity) {
      for (int i = 0; i < nd; ++i) t.emplace_back(bi * nd + i, bj * nd + i, scale);
      return;
    }
    for (int j = 0; j < a.outerSize(); ++j) {
      for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
        t.emplace_back(bi * nd + static_cast<int>(it.row()), bj * nd + static_cast<int>(it.col()),
                       scale * it.value());
      }
    }
  };
  const Matrix c1 = ac.c1();
  const Matrix c2 = ac.c2();
  for (int i = 0; i < n_t; ++i) {
    for (int j = 0; j < n_t; ++j) {
      add_block(i, j, c1(i, j), true);
      add_block(i, j, c2(i, j), false);
    }
  }
  SparseMatrix m(size, size);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();

  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) throw SingularSystemError("all-at-once matrix is singular");
  const Eigen::Map<const Vector> b(rhs.data(), size);
  Vector x = lu.solve(b);
  Vector r = b - m * x;
  if (r.norm() > 1e-12 * b.norm()) x += lu.solve(r);
  return Eigen::Map<const BlockMatrix>(x.data(), nd, n_t);
}

BlockMatrix random_initial_guess(int n_dof, int n_t, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  BlockMatrix u(n_dof, n_t);
  for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = dist(gen);
  return u;
}

double modal_error(const SpatialOperator& op, const BlockMatrix& u, const Trajectory& reference, NormKind kind) {
  const BlockMatrix diff = u - reference.blocks();
  return block_error(to_modal_blocks(op, diff), kind, op.grid());
}

ConvergenceReport run_pint_linear(const SpatialOperator& op, double theta, const TimeGrid& grid,
                                  const PintConfig& cfg, const Vector& u0, const Trajectory& reference,
                                  const std::optional<BlockMatrix>& initial_guess, BlockMatrix* final_iterate) {
  const auto start = std::chrono::steady_clock::now();
  if (cfg.tol <= 0.0) throw std::invalid_argument("tol must be positive");
  if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (u0.size() != op.n_dof()) throw ShapeError("initial condition length does not match n_dof");
  if (reference.states.size() != static_cast<std::size_t>(grid.n_t) + 1) {
    throw ShapeError("reference trajectory must have n_t + 1 states");
  }

  const AlphaCirculant ac = build_circulants(grid.n_t, cfg.alpha, grid.dt, theta, true);
  const DiagonalizationData diag = diagonalize(ac, cfg.solver.backend);
  AllAtOnceSolver solver(diag, diag.eigs_c1, diag.eigs_c2, op,
                         cfg.solver);

  BlockMatrix u = initial_guess ? *initial_guess : random_initial_guess(op.n_dof(), grid.n_t, cfg.seed);
  if (u.rows() != op.n_dof() || u.cols() != grid.n_t) throw ShapeError("initial guess has the wrong shape");
  const BlockMatrix ref_blocks = reference.blocks();

  ConvergenceReport report;
  report.norm_kind = cfg.norm_kind;
  report.tol = cfg.tol;
  report.initial_error = block_error(u - ref_blocks, cfg.norm_kind, op.grid());
  // The iteration runs in modal coordinates; A never meets a physical vector.
  const Vector u0_hat = op.to_modal(u0);
  const Eigen::Map<const Vector> mu(op.spectrum().data(), static_cast<Eigen::Index>(op.spectrum().size()));
  Vector last_hat = op.to_modal(Vector(u.col(grid.n_t - 1)));
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Vector v = u0_hat - cfg.alpha * last_hat;
    BlockMatrix b = BlockMatrix::Zero(op.n_dof(), grid.n_t);
    b.col(0) = v / grid.dt;
    if (theta < 1.0) b.col(0) -= (1.0 - theta) * mu.cwiseProduct(v);
    double imag = 0.0;
    const BlockMatrix u_hat = solve_refined_modal(solver, op, ac, b, cfg.refinements, &imag);
    last_hat = u_hat.col(grid.n_t - 1);
    u = from_modal_blocks(op, u_hat);
    report.imag_residue_max = std::max(report.imag_residue_max, imag);
    const double err = block_error(u - ref_blocks, cfg.norm_kind, op.grid());
    report.errors.push_back(err);
    report.modal_errors.push_back(modal_error(op, u, reference, cfg.norm_kind));
    report.iterations = k;
    if (err <= cfg.tol) {
      report.converged = true;
      break;
    }
  }
  if (final_iterate) *final_iterate = u;
  report.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace pint
