#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "pint/pint_cahn_hilliard.hpp"

using namespace pint;

namespace {

Vector profile(int n, double h) {
  Vector u(n);
  for (int i = 0; i < n; ++i) {
    const double x = i * h;
    u(i) = 0.6 * std::cos(std::numbers::pi * x) + 0.2 * std::cos(3 * std::numbers::pi * x);
  }
  return u;
}

// Full Newton on the assembled nonlinear all-at-once system, exact Jacobian.
BlockMatrix dense_newton(ChVariant v, const AlphaCirculant& ac, int n, double h, double eps, const BlockMatrix& b,
                         const BlockMatrix& start) {
  const Matrix l = oracle::neumann_laplacian(n, h);
  const Matrix i_x = Matrix::Identity(n, n);
  const Matrix i_t = Matrix::Identity(ac.n_t, ac.n_t);
  const Matrix c1 = oracle::alpha_circulant(ac.first_col_c1, ac.alpha);
  Vector c3col = Vector::Zero(ac.n_t);
  c3col(1) = 1.0;
  const Matrix c3 = oracle::alpha_circulant(c3col, ac.alpha);
  const Matrix lin = oracle::kron(c1, i_x) + eps * eps * oracle::kron(i_t, l * l) +
                     (v == ChVariant::PintI ? oracle::kron(i_t, l) : oracle::kron(c3, l));
  const Matrix il = oracle::kron(i_t, l);
  const Vector bv = oracle::vec(b);
  auto f = [&](const Vector& u) -> Vector { return lin * u - il * Vector(u.array().cube()) - bv; };
  auto jac = [&](const Vector& u) -> Matrix { return lin - il * Vector(3 * u.array().square()).asDiagonal(); };
  return oracle::unvec(oracle::newton(f, jac, oracle::vec(start)), n, ac.n_t);
}

}  // namespace

TEST(Nonlinear, CubeTerm) {
  EXPECT_EQ(nonlinear_term(BlockMatrix::Zero(2, 3)), BlockMatrix::Zero(2, 3));
  EXPECT_EQ(nonlinear_term(BlockMatrix::Ones(2, 3)), BlockMatrix::Ones(2, 3));
  EXPECT_EQ(nonlinear_term(BlockMatrix::Constant(2, 3, 0.5)), BlockMatrix::Constant(2, 3, 0.125));
}

TEST(Nonlinear, AveragedJacobian) {
  EXPECT_EQ(averaged_jacobian(BlockMatrix::Zero(3, 2)), Vector::Zero(3));
  EXPECT_EQ(averaged_jacobian(BlockMatrix::Ones(3, 4)), Vector::Constant(3, 9.0));
  BlockMatrix u(1, 2);
  u << 1.0, 0.0;
  EXPECT_DOUBLE_EQ(averaged_jacobian(u)(0), 4.5);
  EXPECT_DOUBLE_EQ(averaged_jacobian(u, JacobianForm::Analytic)(0), 1.5);
}

TEST(Residual, ZeroAndEquilibrium) {
  const auto lap = make_grid_laplacian(Mesh1D{6, 0.2});
  const auto ac = build_circulants(3, 0.1, 1e-3, 1.0);
  for (auto v : {ChVariant::PintI, ChVariant::PintII}) {
    const NonlinearAllAtOnce sys(v, lap, 0.1, ac);
    EXPECT_EQ(residual(sys, BlockMatrix::Zero(6, 3), BlockMatrix::Zero(6, 3)).norm(), 0.0);
    const Vector one = Vector::Ones(6);
    const BlockMatrix b = build_ch_rhs(sys, one, one);
    EXPECT_LT(residual(sys, BlockMatrix::Ones(6, 3), b).norm(), 1e-9);
  }
}

TEST(Residual, SequentialTrajectoriesSatisfySystems) {
  const int n = 9;
  const double h = 0.125, dt = 1e-3, alpha = 0.05;
  const auto lap = make_grid_laplacian(Mesh1D{n, h});
  const ChProblem prob{0.2};
  const auto grid = TimeGrid::from(4 * dt, dt);
  const Vector u0 = profile(n, h);
  const auto ac = build_circulants(grid.n_t, alpha, dt, 1.0);

  const auto impl = solve_ch_implicit_sequential(lap, prob, grid, u0);
  const NonlinearAllAtOnce s1(ChVariant::PintI, lap, prob.epsilon, ac);
  const BlockMatrix u1 = impl.blocks();
  EXPECT_LT(residual_G(s1, u1, build_ch_rhs(s1, u0, u1.col(grid.n_t - 1))).lpNorm<Eigen::Infinity>(), 1e-10);

  const auto eyre = solve_ch_eyre_sequential(lap, prob, grid, u0);
  const NonlinearAllAtOnce s2(ChVariant::PintII, lap, prob.epsilon, ac);
  const BlockMatrix u2 = eyre.blocks();
  EXPECT_LT(residual_Q(s2, u2, build_ch_rhs(s2, u0, u2.col(grid.n_t - 1))).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(QuasiNewton, EquilibriumReturnsImmediately) {
  const auto lap = make_grid_laplacian(Mesh1D{6, 0.2});
  const NonlinearAllAtOnce sys(ChVariant::PintI, lap, 0.1, build_circulants(3, 0.1, 1e-3, 1.0));
  const Vector one = Vector::Ones(6);
  const auto r = quasi_newton_solve(sys, build_ch_rhs(sys, one, one), BlockMatrix::Ones(6, 3));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
}

TEST(QuasiNewton, LimitsMatchDenseNewton) {
  const int n = 6, n_t = 3;
  const double h = 0.2, dt = 1e-3, eps = 0.2, alpha = 0.05;
  const auto lap = make_grid_laplacian(Mesh1D{n, h});
  const auto ac = build_circulants(n_t, alpha, dt, 1.0);
  const Vector u0 = profile(n, h);
  const Vector u_prev = 0.9 * u0;
  for (auto v : {ChVariant::PintI, ChVariant::PintII}) {
    const NonlinearAllAtOnce sys(v, lap, eps, ac);
    const BlockMatrix b = build_ch_rhs(sys, u0, u_prev);
    const BlockMatrix start = u0.replicate(1, n_t);
    const BlockMatrix expect = dense_newton(v, ac, n, h, eps, b, start);
    const auto r = quasi_newton_solve(sys, b, start);
    ASSERT_TRUE(r.converged) << to_string(v);
    EXPECT_LT((r.u - expect).lpNorm<Eigen::Infinity>(), 1e-8) << to_string(v);
    EXPECT_LT(r.imag_residue_max, 1e-10);
  }
}

TEST(QuasiNewton, RejectsBadOptions) {
  const auto lap = make_grid_laplacian(Mesh1D{6, 0.2});
  const NonlinearAllAtOnce sys(ChVariant::PintI, lap, 0.1, build_circulants(3, 0.1, 1e-3, 1.0));
  QuasiNewtonOptions o;
  o.inner_tol = 0.0;
  EXPECT_THROW((void)quasi_newton_solve(sys, BlockMatrix::Zero(6, 3), BlockMatrix::Zero(6, 3), o),
               std::invalid_argument);
  EXPECT_THROW((void)quasi_newton_solve(sys, BlockMatrix::Zero(6, 3), BlockMatrix::Zero(6, 2)), ShapeError);
}

TEST(RunPintCh, ConvergesAndFixedPoint) {
  const int n = 17;
  const double h = 1.0 / 16;
  const auto lap = make_grid_laplacian(Mesh1D{n, h});
  const ChProblem prob{0.15};
  const auto grid = TimeGrid::from(0.02, 1e-3);
  const Vector u0 = profile(n, h);
  ChPintConfig cfg;
  cfg.pint.alpha = 0.01;
  cfg.pint.max_iter = 15;
  for (auto v : {ChVariant::PintI, ChVariant::PintII}) {
    const auto ref = v == ChVariant::PintI ? solve_ch_implicit_sequential(lap, prob, grid, u0)
                                           : solve_ch_eyre_sequential(lap, prob, grid, u0);
    const auto rep = run_pint_ch(v, prob, lap, grid, cfg, u0, ref);
    EXPECT_TRUE(rep.converged) << to_string(v);
    EXPECT_EQ(rep.inner_iterations.size(), static_cast<std::size_t>(rep.iterations));
    const auto fixed = run_pint_ch(v, prob, lap, grid, cfg, u0, ref, ref.blocks());
    EXPECT_TRUE(fixed.converged);
    EXPECT_EQ(fixed.iterations, 1);
  }
}
