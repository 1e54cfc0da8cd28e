#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "pint/circulant.hpp"

using namespace pint;

namespace {

// Dense F with F(l, r) = exp(2 pi i l r / n) / sqrt(n).
CMatrix dft(int n) {
  CMatrix f(n, n);
  for (int l = 0; l < n; ++l)
    for (int r = 0; r < n; ++r) f(l, r) = std::polar(1.0 / std::sqrt(double(n)), 2 * std::numbers::pi * l * r / n);
  return f;
}

double rel_frobenius(const CMatrix& a, const Matrix& b) { return (a - b.cast<Complex>()).norm() / b.norm(); }

}  // namespace

TEST(Circulant, SmallMatrices) {
  const auto a = build_circulants(2, 0.5, 1.0, 1.0);
  EXPECT_EQ(a.c1(), (Matrix(2, 2) << 1, -0.5, -1, 1).finished());
  EXPECT_EQ(a.c2(), Matrix::Identity(2, 2));

  const auto b = build_circulants(3, 0.5, 0.1, 1.0);
  const Matrix c1 = (Matrix(3, 3) << 10, 0, -5, -10, 10, 0, 0, -10, 10).finished();
  EXPECT_LT((b.c1() - c1).norm(), 1e-12);

  const auto c = build_circulants(2, 0.5, 1.0, 0.5);
  EXPECT_EQ(c.c2(), (Matrix(2, 2) << 0.5, 0.25, 0.5, 0.5).finished());
  EXPECT_EQ(c.c3(), (Matrix(2, 2) << 0, 0.5, 1, 0).finished());
}

TEST(Circulant, MatchesDefinition) {
  const auto a = build_circulants(6, 0.3, 0.2, 0.7);
  EXPECT_LT((a.c1() - oracle::alpha_circulant(a.first_col_c1, 0.3)).norm(), 1e-14);
  EXPECT_LT((a.c2() - oracle::alpha_circulant(a.first_col_c2, 0.3)).norm(), 1e-14);
  EXPECT_LT((a.c3() - oracle::alpha_circulant(a.first_col_c3(), 0.3)).norm(), 1e-14);
}

TEST(Circulant, RejectsBadInput) {
  EXPECT_THROW((void)build_circulants(1, 0.5, 1.0, 1.0), std::invalid_argument);
  EXPECT_NO_THROW((void)build_circulants(1, 0.5, 1.0, 1.0, true));
  EXPECT_THROW((void)build_circulants(4, 0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW((void)build_circulants(4, 1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW((void)build_circulants(4, 0.5, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW((void)build_circulants(4, 0.5, 1.0, 1.5), std::invalid_argument);
}

TEST(Circulant, SingleStepReducesToScalars) {
  const auto a = build_circulants(1, 0.25, 0.5, 0.5, true);
  EXPECT_NEAR(a.c1()(0, 0), (1 - 0.25) / 0.5, 1e-15);
  EXPECT_NEAR(a.c2()(0, 0), 0.5 + 0.5 * 0.25, 1e-15);
}

TEST(Circulant, ApplyMatchesDenseProduct) {
  const auto a = build_circulants(5, 0.2, 0.1, 0.5);
  const BlockMatrix u = BlockMatrix::Random(4, 5);
  EXPECT_LT((apply_circulant(a.first_col_c2, 0.2, u) - u * a.c2().transpose()).norm(), 1e-13);
  EXPECT_THROW((void)apply_circulant(a.first_col_c1, 0.2, BlockMatrix::Random(4, 3)), ShapeError);
}

TEST(Diagonalize, TwoStepEigenvalues) {
  const auto a = build_circulants(2, 0.25, 1.0, 1.0);
  const auto d = diagonalize(a);
  std::vector<double> re = {d.eigs_c1(0).real(), d.eigs_c1(1).real()};
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], 0.5, 1e-14);
  EXPECT_NEAR(re[1], 1.5, 1e-14);
  EXPECT_LT(d.eigs_c1.imag().cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((d.eigs_c2 - CVector::Ones(2)).norm(), 1e-14);
}

TEST(Diagonalize, ThetaZeroGivesC3) {
  const auto d = diagonalize(build_circulants(7, 0.1, 0.3, 0.0));
  EXPECT_LT((d.eigs_c2 - d.eigs_c3).norm(), 1e-13);
}

TEST(Diagonalize, EigenvaluesMatchDenseEigensolve) {
  const auto a = build_circulants(6, 0.05, 0.1, 0.5);
  const auto d = diagonalize(a);
  for (const auto& [eigs, m] : {std::pair{d.eigs_c1, a.c1()}, std::pair{d.eigs_c2, a.c2()}}) {
    auto got = eigs;
    std::sort(got.data(), got.data() + got.size(), [](auto x, auto y) {
      return std::abs(x.real() - y.real()) > 1e-9 ? x.real() < y.real() : x.imag() < y.imag();
    });
    EXPECT_LT((got - oracle::sorted_eigenvalues(m)).norm(), 1e-9 * m.norm());
  }
}

TEST(Diagonalize, ReconstructsCirculants) {
  for (int n : {2, 3, 5, 8, 11, 16, 37, 64}) {
    for (double alpha : {1e-3, 0.1, 0.5}) {
      for (auto backend : {TransformBackend::Auto, TransformBackend::DenseDft, TransformBackend::Fft}) {
        const auto a = build_circulants(n, alpha, 0.01, 0.5);
        const auto d = diagonalize(a, backend);
        const CMatrix v = eigenvector_matrix(n, alpha);
        const CMatrix vinv = v.inverse();
        EXPECT_LT(rel_frobenius(v * d.eigs_c1.asDiagonal() * vinv, a.c1()), 1e-10) << n << ' ' << alpha;
        EXPECT_LT(rel_frobenius(v * d.eigs_c2.asDiagonal() * vinv, a.c2()), 1e-10) << n << ' ' << alpha;
        EXPECT_LT(rel_frobenius(v * d.eigs_c3.asDiagonal() * vinv, a.c3()), 1e-10) << n << ' ' << alpha;
      }
    }
  }
}

TEST(Transforms, Step1ConstantFirstBlock) {
  const int n = 4;
  const Vector gamma = gamma_scaling(n, 0.3);
  CBlockMatrix b = CBlockMatrix::Zero(3, n);
  b.col(0) << 1.0, -2.0, 0.5;
  const CBlockMatrix s = step1_transform(b, gamma);
  for (int j = 0; j < n; ++j) EXPECT_LT((s.col(j) - b.col(0) / std::sqrt(double(n))).norm(), 1e-14);
}

TEST(Transforms, Step3ConcentratesConstantBlocks) {
  const int n = 5;
  const Vector gamma = gamma_scaling(n, 0.3);
  const CVector v = (CVector(2) << Complex(1, 1), Complex(-2, 0)).finished();
  const CBlockMatrix s = v.replicate(1, n);
  const CBlockMatrix u = step3_transform(s, gamma);
  EXPECT_LT((u.col(0) - std::sqrt(double(n)) * v).norm(), 1e-13);
  for (int j = 1; j < n; ++j) EXPECT_LT(u.col(j).norm(), 1e-13);
}

TEST(Transforms, MatchDenseAndInvert) {
  for (int n : {1, 6, 13, 32}) {
    const Vector gamma = gamma_scaling(n, 1e-2);
    const CBlockMatrix b = CBlockMatrix::Random(4, n);
    const CMatrix f = dft(n);
    const CBlockMatrix expect1 = (f * gamma.cast<Complex>().asDiagonal() * b.transpose()).transpose();
    const CBlockMatrix expect3 = (gamma.cwiseInverse().cast<Complex>().asDiagonal() * f.adjoint() * b.transpose())
                                     .transpose();
    for (auto backend : {TransformBackend::Fft, TransformBackend::DenseDft}) {
      EXPECT_LT((step1_transform(b, gamma, backend) - expect1).norm(), 1e-12 * expect1.norm());
      EXPECT_LT((step3_transform(b, gamma, backend) - expect3).norm(), 1e-12 * expect3.norm());
      EXPECT_LT((step3_transform(step1_transform(b, gamma, backend), gamma, backend) - b).norm(), 1e-11);
    }
  }
  EXPECT_THROW((void)step1_transform(CBlockMatrix::Random(2, 3), gamma_scaling(4, 0.5)), ShapeError);
}

TEST(Transforms, SingleBlockIsIdentity) {
  const CBlockMatrix b = CBlockMatrix::Random(3, 1);
  const Vector gamma = gamma_scaling(1, 0.2);
  EXPECT_LT((step1_transform(b, gamma) - b).norm(), 1e-15);
  EXPECT_LT((step3_transform(b, gamma) - b).norm(), 1e-15);
}

TEST(Transforms, WorkerCountDoesNotChangeResult) {
  const CBlockMatrix b = CBlockMatrix::Random(17, 12);
  const Vector gamma = gamma_scaling(12, 1e-3);
  EXPECT_EQ(step1_transform(b, gamma, TransformBackend::Auto, 1), step1_transform(b, gamma, TransformBackend::Auto, 4));
}
