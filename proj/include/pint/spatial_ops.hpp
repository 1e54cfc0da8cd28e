#pragma once

#include <memory>
#include <string_view>
#include <utility>
#include <vector>

#include "pint/band_lu.hpp"
#include "pint/common.hpp"

namespace pint {

/// Largest 2D system admitted by default: 65 x 65 points, i.e. h = 1/64 on the
/// unit square.
inline constexpr int kDefaultDofCap = 65 * 65;

struct Mesh1D {
  int n_x = 0;
  double h = 0.0;
};

struct Mesh2D {
  int n_x = 0;
  double h = 0.0;
};

void validate(const Mesh1D& mesh);
void validate(const Mesh2D& mesh);

enum class OperatorKind { Biharmonic, LinearizedCH, GeneralFourthOrder, LaplacianOnly };

[[nodiscard]] std::string_view to_string(OperatorKind kind);

struct OperatorParams {
  double epsilon = 1.0;  // interface width, used by LinearizedCH
  double beta = 0.0;     // spinodal coefficient, used by LinearizedCH
};

/// The Neumann Laplacian on a grid together with its square.
struct GridLaplacian {
  Grid grid;
  SparseMatrix lap;
  SparseMatrix lap_sq;
};

[[nodiscard]] GridLaplacian make_grid_laplacian(const Mesh1D& mesh);
[[nodiscard]] GridLaplacian make_grid_laplacian(const Mesh2D& mesh, int dof_cap = kDefaultDofCap);

/// Tridiagonal Neumann Laplacian with the (-2, 2) / (2, -2) boundary rows.
[[nodiscard]] SparseMatrix assemble_laplacian_1d(const Mesh1D& mesh);

/// lambda_p = 2/h^2 (cos((p-1) pi / (n_x-1)) - 1), p = 1..n_x, in increasing p.
[[nodiscard]] std::vector<double> analytic_spectrum_laplacian_1d(const Mesh1D& mesh);

/// Kronecker sum I (x) L + L (x) I; the x index runs fastest.
[[nodiscard]] SparseMatrix assemble_laplacian_2d(const Mesh2D& mesh, int dof_cap = kDefaultDofCap);

/// Cosine eigenvectors of the 1D Neumann Laplacian, column p for lambda_p.
[[nodiscard]] Matrix laplacian_eigenvectors_1d(int n_x);

/// Spatial operator A of the semi-discrete problem u' + A u = 0.
///
/// Immutable after assembly. The spectrum is analytic, ordered p + n_x * q in
/// 2D so that it lines up with to_modal().
class SpatialOperator {
 public:
  SpatialOperator(OperatorKind kind, GridLaplacian laplacian, OperatorParams params);

  [[nodiscard]] OperatorKind kind() const { return kind_; }
  [[nodiscard]] int dim() const { return lap_.grid.dim; }
  [[nodiscard]] int n_dof() const { return lap_.grid.n_dof(); }
  [[nodiscard]] const Grid& grid() const { return lap_.grid; }
  [[nodiscard]] const OperatorParams& params() const { return params_; }
  [[nodiscard]] const SparseMatrix& matrix() const { return matrix_; }
  [[nodiscard]] Matrix dense() const { return Matrix(matrix_); }
  [[nodiscard]] const GridLaplacian& laplacian() const { return lap_; }
  [[nodiscard]] const std::vector<double>& spectrum() const { return spectrum_; }
  [[nodiscard]] int bandwidth() const { return pint::bandwidth(matrix_); }

  [[nodiscard]] Vector apply(const Vector& x) const { return matrix_ * x; }

  /// A = a lap^2 + b lap for every kind; returns (a, b).
  [[nodiscard]] std::pair<double, double> laplacian_polynomial() const;

  /// Coefficients of x in the eigenvector basis (P^{-1} x).
  [[nodiscard]] Vector to_modal(const Vector& x) const;
  [[nodiscard]] Vector from_modal(const Vector& c) const;
  [[nodiscard]] CVector to_modal(const CVector& x) const;
  [[nodiscard]] CVector from_modal(const CVector& c) const;

  /// A x through the eigenbasis. Unlike the stencil product, the smooth modes
  /// of the result keep full relative accuracy when ||A|| is large.
  [[nodiscard]] Vector apply_modal(const Vector& x) const;

 private:
  OperatorKind kind_;
  GridLaplacian lap_;
  OperatorParams params_;
  SparseMatrix matrix_;
  std::vector<double> spectrum_;
  Matrix modal_1d_;  // P^{-1} in 1D
  Matrix eigvec_1d_;  // P in 1D
};

[[nodiscard]] SpatialOperator assemble_operator(OperatorKind kind, const Mesh1D& mesh,
                                                OperatorParams params = {});
[[nodiscard]] SpatialOperator assemble_operator(OperatorKind kind, const Mesh2D& mesh,
                                                OperatorParams params = {});

/// Factors of one shifted matrix: solving applies each stage in turn and then
/// divides by `scale`.
struct ShiftedFactor {
  std::vector<BandLU<Complex>> stages;
  Complex scale{1.0, 0.0};

  template <typename Derived>
  void solve_in_place(Eigen::MatrixBase<Derived>& x) const {
    for (const auto& s : stages) s.solve_in_place(x);
    if (scale != Complex(1.0, 0.0)) x /= scale;
  }
};

/// A family of complex matrices sigma I + tau B (+ K) sharing one pattern.
class ShiftedSystems {
 public:
  virtual ~ShiftedSystems() = default;
  [[nodiscard]] virtual int size() const = 0;
  /// Memory held by one factorization.
  [[nodiscard]] virtual std::size_t factor_bytes() const = 0;
  /// Throws SingularSystemError naming the shift on a zero pivot.
  virtual void factorize_into(ShiftedFactor& f, Complex sigma, Complex tau) const = 0;
  [[nodiscard]] virtual CVector apply(Complex sigma, Complex tau, const CVector& x) const = 0;
};

/// sigma I + tau B + K with real banded B and K; an empty (0 x 0) K is zero.
class ShiftedFamily final : public ShiftedSystems {
 public:
  ShiftedFamily(const SparseMatrix& b, const SparseMatrix& k);

  [[nodiscard]] int size() const override { return n_; }
  [[nodiscard]] int half_bandwidth() const { return bw_; }
  [[nodiscard]] std::size_t factor_bytes() const override;
  void factorize_into(ShiftedFactor& f, Complex sigma, Complex tau) const override;
  void factorize_into(BandLU<Complex>& lu, Complex sigma, Complex tau) const;
  [[nodiscard]] CVector apply(Complex sigma, Complex tau, const CVector& x) const override;

 private:
  int n_ = 0;
  int bw_ = 0;
  SparseMatrix b_;
  SparseMatrix k_;
  std::vector<double> b_band_;
  std::vector<double> k_band_;
  std::vector<std::size_t> diag_offsets_;
};

/// sigma I + tau (a lap^2 + b lap), factored as tau a (lap - r1)(lap - r2).
/// Each stage only carries the conditioning of the shifted Laplacian, which
/// keeps the smooth modes accurate when |sigma / tau| is small against
/// ||lap^2||.
class LaplacianPolynomialFamily final : public ShiftedSystems {
 public:
  LaplacianPolynomialFamily(const SparseMatrix& lap, double a, double b);
  explicit LaplacianPolynomialFamily(const SpatialOperator& op);

  [[nodiscard]] int size() const override { return n_; }
  [[nodiscard]] std::size_t factor_bytes() const override;
  void factorize_into(ShiftedFactor& f, Complex sigma, Complex tau) const override;
  [[nodiscard]] CVector apply(Complex sigma, Complex tau, const CVector& x) const override;

 private:
  int n_ = 0;
  int bw_ = 0;
  double a_ = 0.0;
  double b_ = 0.0;
  SparseMatrix lap_;
  std::vector<double> lap_band_;
  std::vector<std::size_t> diag_offsets_;
};

/// Solves (sigma I + tau A) x = rhs through the factored Laplacian polynomial,
/// with one refinement step when the relative residual exceeds 1e-12.
[[nodiscard]] CVector shifted_solve(const SpatialOperator& op, Complex sigma, Complex tau,
                                    const CVector& rhs);

}  // namespace pint
