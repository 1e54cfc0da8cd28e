#pragma once

#include "pint/common.hpp"

namespace pint {

/// The time matrices C1, C2 and C3 of the all-at-once system.
///
/// An alpha-circulant matrix is fixed by its first column c: entry (i, j) is
/// c[i - j] for i >= j and alpha * c[n_t + i - j] above the diagonal.
struct AlphaCirculant {
  int n_t = 0;
  double alpha = 0.0;
  double dt = 0.0;
  double theta = 1.0;
  Vector first_col_c1;
  Vector first_col_c2;

  [[nodiscard]] Vector first_col_c3() const;
  [[nodiscard]] Matrix c1() const;
  [[nodiscard]] Matrix c2() const;
  [[nodiscard]] Matrix c3() const;
};

/// n_t >= 2 unless allow_single_step is set; the one-step system is still
/// well defined and is what a run with T = dt produces.
[[nodiscard]] AlphaCirculant build_circulants(int n_t, double alpha, double dt, double theta,
                                              bool allow_single_step = false);

[[nodiscard]] Matrix alpha_circulant_matrix(const Vector& first_col, double alpha);

/// (C (x) I) U for the alpha-circulant C with the given first column, using
/// only its nonzero entries.
[[nodiscard]] BlockMatrix apply_circulant(const Vector& first_col, double alpha, const BlockMatrix& u);

enum class TransformBackend { Auto, Fft, DenseDft };

struct DiagonalizationData {
  int n_t = 0;
  double alpha = 0.0;
  Vector gamma;  // alpha^{r/n_t}, r = 0..n_t-1
  CVector eigs_c1;
  CVector eigs_c2;
  CVector eigs_c3;
};

[[nodiscard]] DiagonalizationData diagonalize(const AlphaCirculant& ac,
                                              TransformBackend backend = TransformBackend::Auto);

/// Eigenvalues sqrt(n_t) F Gamma c of the alpha-circulant with first column c.
[[nodiscard]] CVector circulant_eigenvalues(const Vector& first_col, const Vector& gamma,
                                            TransformBackend backend = TransformBackend::Auto);

[[nodiscard]] Vector gamma_scaling(int n_t, double alpha);

/// Dense V = Gamma^{-1} F^*, for checks at small n_t.
[[nodiscard]] CMatrix eigenvector_matrix(int n_t, double alpha);

/// Blocks are the columns of b (n_dof x n_t). Step 1 applies (F Gamma) across
/// the block index, step 3 applies (Gamma^{-1} F^*). Rows are independent and
/// are split over `workers` threads.
[[nodiscard]] CBlockMatrix step1_transform(const CBlockMatrix& b, const Vector& gamma,
                                           TransformBackend backend = TransformBackend::Auto,
                                           int workers = 1);
[[nodiscard]] CBlockMatrix step3_transform(const CBlockMatrix& s, const Vector& gamma,
                                           TransformBackend backend = TransformBackend::Auto,
                                           int workers = 1);

}  // namespace pint
