#include "pint/spatial_ops.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "pint/log.hpp"

namespace pint {
namespace {

using Triplet = Eigen::Triplet<double>;

void validate_points(int n_x, double h) {
  if (n_x < 3) {
    throw std::invalid_argument("mesh needs n_x >= 3 for the Neumann stencil, got " +
                                std::to_string(n_x));
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("mesh spacing must be positive and finite");
  }
}

double eigenvalue_for(OperatorKind kind, double lambda, const OperatorParams& p) {
  switch (kind) {
    case OperatorKind::Biharmonic:
      return lambda * lambda;
    case OperatorKind::LinearizedCH:
      return p.beta * p.beta * lambda + p.epsilon * p.epsilon * lambda * lambda;
    case OperatorKind::GeneralFourthOrder:
      return lambda * lambda - lambda;
    case OperatorKind::LaplacianOnly:
      return -lambda;
  }
  throw std::invalid_argument("unknown operator kind");
}

SparseMatrix matrix_for(OperatorKind kind, const GridLaplacian& l, const OperatorParams& p) {
  switch (kind) {
    case OperatorKind::Biharmonic:
      return l.lap_sq;
    case OperatorKind::LinearizedCH: {
      SparseMatrix a = (p.beta * p.beta) * l.lap + (p.epsilon * p.epsilon) * l.lap_sq;
      return a;
    }
    case OperatorKind::GeneralFourthOrder: {
      SparseMatrix a = l.lap_sq - l.lap;
      return a;
    }
    case OperatorKind::LaplacianOnly: {
      SparseMatrix a = -l.lap;
      return a;
    }
  }
  throw std::invalid_argument("unknown operator kind");
}

Vector trapezoid_weights_1d(int n_x) {
  Vector w = Vector::Ones(n_x);
  w(0) = 0.5;
  w(n_x - 1) = 0.5;
  return w;
}

}  // namespace

void validate(const Mesh1D& mesh) { validate_points(mesh.n_x, mesh.h); }
void validate(const Mesh2D& mesh) { validate_points(mesh.n_x, mesh.h); }

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Biharmonic:
      return "Biharmonic";
    case OperatorKind::LinearizedCH:
      return "LinearizedCH";
    case OperatorKind::GeneralFourthOrder:
      return "GeneralFourthOrder";
    case OperatorKind::LaplacianOnly:
      return "LaplacianOnly";
  }
  return "unknown";
}

SparseMatrix assemble_laplacian_1d(const Mesh1D& mesh) {
  validate(mesh);
  const int n = mesh.n_x;
  const double s = 1.0 / (mesh.h * mesh.h);
  std::vector<Triplet> t;
  t.reserve(3 * n);
  t.emplace_back(0, 0, -2.0 * s);
  t.emplace_back(0, 1, 2.0 * s);
  for (int i = 1; i < n - 1; ++i) {
    t.emplace_back(i, i - 1, s);
    t.emplace_back(i, i, -2.0 * s);
    t.emplace_back(i, i + 1, s);
  }
  t.emplace_back(n - 1, n - 2, 2.0 * s);
  t.emplace_back(n - 1, n - 1, -2.0 * s);
  SparseMatrix lap(n, n);
  lap.setFromTriplets(t.begin(), t.end());
  return lap;
}

std::vector<double> analytic_spectrum_laplacian_1d(const Mesh1D& mesh) {
  validate(mesh);
  const int n = mesh.n_x;
  std::vector<double> lambda(n);
  for (int p = 0; p < n; ++p) {
    lambda[p] = 2.0 / (mesh.h * mesh.h) * (std::cos(p * std::numbers::pi / (n - 1)) - 1.0);
  }
  return lambda;
}

SparseMatrix assemble_laplacian_2d(const Mesh2D& mesh, int dof_cap) {
  validate(mesh);
  const long n = mesh.n_x;
  if (n * n > dof_cap) {
    std::ostringstream msg;
    msg << "2D grid with " << n << "^2 = " << n * n << " unknowns exceeds the cap of " << dof_cap;
    throw std::length_error(msg.str());
  }
  const SparseMatrix l1 = assemble_laplacian_1d(Mesh1D{mesh.n_x, mesh.h});
  const Matrix d1(l1);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(6 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int row = i + static_cast<int>(n) * j;
      for (int c = std::max(0, i - 1); c <= std::min<int>(n - 1, i + 1); ++c) {
        if (d1(i, c) != 0.0) t.emplace_back(row, c + static_cast<int>(n) * j, d1(i, c));
      }
      for (int c = std::max(0, j - 1); c <= std::min<int>(n - 1, j + 1); ++c) {
        if (d1(j, c) != 0.0) t.emplace_back(row, i + static_cast<int>(n) * c, d1(j, c));
      }
    }
  }
  SparseMatrix lap(n * n, n * n);
  lap.setFromTriplets(t.begin(), t.end());
  return lap;
}

GridLaplacian make_grid_laplacian(const Mesh1D& mesh) {
  GridLaplacian g;
  g.grid = Grid{1, mesh.n_x, mesh.h};
  g.lap = assemble_laplacian_1d(mesh);
  g.lap_sq = (g.lap * g.lap).pruned();
  return g;
}

GridLaplacian make_grid_laplacian(const Mesh2D& mesh, int dof_cap) {
  GridLaplacian g;
  g.grid = Grid{2, mesh.n_x, mesh.h};
  g.lap = assemble_laplacian_2d(mesh, dof_cap);
  g.lap_sq = (g.lap * g.lap).pruned();
  return g;
}

Matrix laplacian_eigenvectors_1d(int n_x) {
  Matrix p(n_x, n_x);
  for (int col = 0; col < n_x; ++col) {
    for (int i = 0; i < n_x; ++i) {
      p(i, col) = std::cos(static_cast<double>(col) * i * std::numbers::pi / (n_x - 1));
    }
  }
  return p;
}

SpatialOperator::SpatialOperator(OperatorKind kind, GridLaplacian laplacian, OperatorParams params)
    : kind_(kind), lap_(std::move(laplacian)), params_(params) {
  if (params_.epsilon < 0.0) throw std::invalid_argument("epsilon must be non-negative");
  if (kind_ == OperatorKind::LinearizedCH && std::abs(params_.beta) > 1.0 / std::sqrt(3.0)) {
    warn("beta outside [-1/sqrt(3), 1/sqrt(3)]");
  }
  matrix_ = matrix_for(kind_, lap_, params_);

  const Grid& g = lap_.grid;
  const auto lambda = analytic_spectrum_laplacian_1d(Mesh1D{g.n_x, g.h});
  spectrum_.reserve(g.n_dof());
  if (g.dim == 1) {
    for (double l : lambda) spectrum_.push_back(eigenvalue_for(kind_, l, params_));
  } else {
    for (int q = 0; q < g.n_x; ++q) {
      for (int p = 0; p < g.n_x; ++p) {
        spectrum_.push_back(eigenvalue_for(kind_, lambda[p] + lambda[q], params_));
      }
    }
  }

  // The eigenvectors are orthogonal in the trapezoid-weighted inner product,
  // which gives the inverse in closed form.
  eigvec_1d_ = laplacian_eigenvectors_1d(g.n_x);
  const Vector w = trapezoid_weights_1d(g.n_x);
  const Vector norms = (eigvec_1d_.array().square().colwise() * w.array()).colwise().sum().transpose();
  modal_1d_ = norms.cwiseInverse().asDiagonal() * eigvec_1d_.transpose() * w.asDiagonal();
}

std::pair<double, double> SpatialOperator::laplacian_polynomial() const {
  switch (kind_) {
    case OperatorKind::Biharmonic:
      return {1.0, 0.0};
    case OperatorKind::LinearizedCH:
      return {params_.epsilon * params_.epsilon, params_.beta * params_.beta};
    case OperatorKind::GeneralFourthOrder:
      return {1.0, -1.0};
    case OperatorKind::LaplacianOnly:
      return {0.0, -1.0};
  }
  throw std::invalid_argument("unknown operator kind");
}

namespace {

// T x in 1D, T E T^T on the n x n reshape in 2D.
Vector separable_apply(const Matrix& t, int dim, const Vector& x) {
  if (dim == 1) return t * x;
  const auto n = t.rows();
  const Eigen::Map<const Matrix> e(x.data(), n, n);
  const Matrix c = t * e * t.transpose();
  return Eigen::Map<const Vector>(c.data(), c.size());
}

CVector separable_apply(const Matrix& t, int dim, const CVector& x) {
  CVector y(x.size());
  y.real() = separable_apply(t, dim, Vector(x.real()));
  y.imag() = separable_apply(t, dim, Vector(x.imag()));
  return y;
}

}  // namespace

Vector SpatialOperator::to_modal(const Vector& x) const {
  if (x.size() != n_dof()) throw ShapeError("to_modal: vector length does not match n_dof");
  return separable_apply(modal_1d_, dim(), x);
}

Vector SpatialOperator::from_modal(const Vector& c) const {
  if (c.size() != n_dof()) throw ShapeError("from_modal: vector length does not match n_dof");
  return separable_apply(eigvec_1d_, dim(), c);
}

CVector SpatialOperator::to_modal(const CVector& x) const {
  if (x.size() != n_dof()) throw ShapeError("to_modal: vector length does not match n_dof");
  return separable_apply(modal_1d_, dim(), x);
}

CVector SpatialOperator::from_modal(const CVector& c) const {
  if (c.size() != n_dof()) throw ShapeError("from_modal: vector length does not match n_dof");
  return separable_apply(eigvec_1d_, dim(), c);
}

Vector SpatialOperator::apply_modal(const Vector& x) const {
  Vector c = to_modal(x);
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= spectrum_[static_cast<std::size_t>(i)];
  return from_modal(c);
}

SpatialOperator assemble_operator(OperatorKind kind, const Mesh1D& mesh, OperatorParams params) {
  return SpatialOperator(kind, make_grid_laplacian(mesh), params);
}

SpatialOperator assemble_operator(OperatorKind kind, const Mesh2D& mesh, OperatorParams params) {
  return SpatialOperator(kind, make_grid_laplacian(mesh), params);
}

ShiftedFamily::ShiftedFamily(const SparseMatrix& b, const SparseMatrix& k)
    : n_(static_cast<int>(b.rows())), b_(b), k_(k) {
  if (b.rows() != b.cols()) throw ShapeError("ShiftedFamily: B must be square");
  const bool has_k = k.size() > 0;
  if (has_k && (k.rows() != b.rows() || k.cols() != b.cols())) {
    throw ShapeError("ShiftedFamily: K must match B");
  }
  bw_ = std::max(pint::bandwidth(b), has_k ? pint::bandwidth(k) : 0);
  BandLU<double> image(n_, bw_, bw_);
  image.assign(b);
  b_band_.assign(image.storage(), image.storage() + image.storage_size());
  if (has_k) {
    image.assign(k);
    k_band_.assign(image.storage(), image.storage() + image.storage_size());
  }
  diag_offsets_.resize(n_);
  for (int i = 0; i < n_; ++i) diag_offsets_[i] = image.offset(i, i);
}

std::size_t ShiftedFamily::factor_bytes() const {
  return b_band_.size() * sizeof(Complex) + static_cast<std::size_t>(n_) * sizeof(int);
}

void ShiftedFamily::factorize_into(ShiftedFactor& f, Complex sigma, Complex tau) const {
  f.stages.resize(1);
  f.scale = Complex(1.0, 0.0);
  factorize_into(f.stages[0], sigma, tau);
}

void ShiftedFamily::factorize_into(BandLU<Complex>& lu, Complex sigma, Complex tau) const {
  if (lu.size() != n_ || lu.lower() != bw_ || lu.upper() != bw_) lu = BandLU<Complex>(n_, bw_, bw_);
  Complex* s = lu.storage();
  const std::size_t len = b_band_.size();
  if (k_band_.empty()) {
    for (std::size_t t = 0; t < len; ++t) s[t] = tau * b_band_[t];
  } else {
    for (std::size_t t = 0; t < len; ++t) s[t] = tau * b_band_[t] + k_band_[t];
  }
  for (std::size_t off : diag_offsets_) s[off] += sigma;
  const int zero_pivot = lu.factorize();
  if (zero_pivot >= 0) {
    std::ostringstream msg;
    msg << "singular shifted matrix sigma*I + tau*B (+K) with sigma = " << sigma
        << ", tau = " << tau << " (zero pivot at row " << zero_pivot << ")";
    throw SingularSystemError(msg.str());
  }
}

CVector ShiftedFamily::apply(Complex sigma, Complex tau, const CVector& x) const {
  if (x.size() != n_) throw ShapeError("ShiftedFamily::apply: length mismatch");
  const Vector xr = x.real();
  const Vector xi = x.imag();
  CVector bx(n_);
  bx.real() = b_ * xr;
  bx.imag() = b_ * xi;
  CVector y = sigma * x + tau * bx;
  if (k_.size() > 0) {
    y.real() += k_ * xr;
    y.imag() += k_ * xi;
  }
  return y;
}

LaplacianPolynomialFamily::LaplacianPolynomialFamily(const SparseMatrix& lap, double a, double b)
    : n_(static_cast<int>(lap.rows())), a_(a), b_(b), lap_(lap) {
  if (lap.rows() != lap.cols()) throw ShapeError("LaplacianPolynomialFamily: lap must be square");
  bw_ = pint::bandwidth(lap);
  BandLU<double> image(n_, bw_, bw_);
  image.assign(lap);
  lap_band_.assign(image.storage(), image.storage() + image.storage_size());
  diag_offsets_.resize(n_);
  for (int i = 0; i < n_; ++i) diag_offsets_[i] = image.offset(i, i);
}

LaplacianPolynomialFamily::LaplacianPolynomialFamily(const SpatialOperator& op)
    : LaplacianPolynomialFamily(op.laplacian().lap, op.laplacian_polynomial().first,
                                op.laplacian_polynomial().second) {}

std::size_t LaplacianPolynomialFamily::factor_bytes() const {
  return 2 * (lap_band_.size() * sizeof(Complex) + static_cast<std::size_t>(n_) * sizeof(int));
}

void LaplacianPolynomialFamily::factorize_into(ShiftedFactor& f, Complex sigma, Complex tau) const {
  // sigma + tau (a z^2 + b z) = tau a (z - r1)(z - r2), r_i roots of a z^2 + b z + sigma / tau.
  std::vector<Complex> roots;
  if (tau == Complex(0.0, 0.0) || (a_ == 0.0 && b_ == 0.0)) {
    f.scale = sigma;
  } else if (a_ == 0.0) {
    f.scale = tau * b_;
    roots.push_back(-sigma / (tau * b_));
  } else {
    const Complex c = sigma / tau;
    const Complex disc = std::sqrt(Complex(b_ * b_, 0.0) - 4.0 * a_ * c);
    // Pick the sign that avoids cancellation.
    const double sign = (b_ * disc.real() >= 0.0) ? 1.0 : -1.0;
    const Complex q = -0.5 * (b_ + sign * disc);
    f.scale = tau * a_;
    if (q == Complex(0.0, 0.0)) {
      roots = {Complex(0.0, 0.0), Complex(0.0, 0.0)};
    } else {
      roots = {q / a_, c / q};
    }
  }
  if (f.scale == Complex(0.0, 0.0)) {
    std::ostringstream msg;
    msg << "singular shifted matrix sigma*I + tau*A with sigma = " << sigma << ", tau = " << tau;
    throw SingularSystemError(msg.str());
  }

  f.stages.resize(roots.size());
  for (std::size_t k = 0; k < roots.size(); ++k) {
    BandLU<Complex>& lu = f.stages[k];
    if (lu.size() != n_ || lu.lower() != bw_ || lu.upper() != bw_) lu = BandLU<Complex>(n_, bw_, bw_);
    Complex* s = lu.storage();
    for (std::size_t t = 0; t < lap_band_.size(); ++t) s[t] = lap_band_[t];
    for (std::size_t off : diag_offsets_) s[off] -= roots[k];
    const int zero_pivot = lu.factorize();
    if (zero_pivot >= 0) {
      std::ostringstream msg;
      msg << "singular shifted matrix sigma*I + tau*A with sigma = " << sigma << ", tau = " << tau
          << " (factor lap - " << roots[k] << " has a zero pivot at row " << zero_pivot << ")";
      throw SingularSystemError(msg.str());
    }
  }
}

CVector LaplacianPolynomialFamily::apply(Complex sigma, Complex tau, const CVector& x) const {
  if (x.size() != n_) throw ShapeError("LaplacianPolynomialFamily::apply: length mismatch");
  const Matrix xr = (Matrix(n_, 2) << x.real(), x.imag()).finished();
  const Matrix l1 = lap_ * xr;
  const Matrix ax = a_ * (lap_ * l1) + b_ * l1;
  CVector y = sigma * x;
  y += tau * CVector(ax.col(0).cast<Complex>() + Complex(0.0, 1.0) * ax.col(1).cast<Complex>());
  return y;
}

CVector shifted_solve(const SpatialOperator& op, Complex sigma, Complex tau, const CVector& rhs) {
  if (rhs.size() != op.n_dof()) throw ShapeError("shifted_solve: rhs length does not match n_dof");
  const LaplacianPolynomialFamily family(op);
  ShiftedFactor f;
  family.factorize_into(f, sigma, tau);
  CVector x = rhs;
  f.solve_in_place(x);
  CVector r = rhs - family.apply(sigma, tau, x);
  if (r.norm() > 1e-12 * rhs.norm()) {
    f.solve_in_place(r);
    x += r;
  }
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << "shifted solve produced non-finite values for sigma = " << sigma << ", tau = " << tau;
    throw SingularSystemError(msg.str());
  }
  return x;
}

}  // namespace pint
