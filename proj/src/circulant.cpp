#include "pint/circulant.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "pint/log.hpp"
#include "pint/parallel.hpp"

namespace pint {
namespace {

bool smooth_length(int n) {
  for (int p : {2, 3, 5, 7}) {
    while (n % p == 0) n /= p;
  }
  return n == 1;
}

TransformBackend resolve(TransformBackend backend, int n_t) {
  if (backend != TransformBackend::Auto) return backend;
  return smooth_length(n_t) ? TransformBackend::Fft : TransformBackend::DenseDft;
}

// F(l, r) = exp(2 pi i l r / n) / sqrt(n); the exponent is reduced mod n first.
CMatrix dft_matrix(int n) {
  CMatrix f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int l = 0; l < n; ++l) {
    for (int r = 0; r < n; ++r) {
      const long k = (static_cast<long>(l) * r) % n;
      f(l, r) = std::polar(scale, 2.0 * std::numbers::pi * static_cast<double>(k) / n);
    }
  }
  return f;
}

enum class Direction { Forward, Backward };

// Forward: y = F (gamma .* x).  Backward: y = gamma^{-1} .* (F^* x).  Applied
// to every row of `in`.
CBlockMatrix transform_rows(const CBlockMatrix& in, const Vector& gamma, Direction dir,
                            TransformBackend backend, int workers) {
  const int n = static_cast<int>(in.cols());
  if (gamma.size() != n) {
    std::ostringstream msg;
    msg << "block count " << n << " does not match the scaling length " << gamma.size();
    throw ShapeError(msg.str());
  }
  CBlockMatrix out(in.rows(), n);
  if (n == 0 || in.rows() == 0) return out;
  const double root_n = std::sqrt(static_cast<double>(n));
  const Vector inv_gamma = gamma.cwiseInverse();
  // Eigen's kissfft does not handle length 1.
  if (n == 1) return dir == Direction::Forward ? CBlockMatrix(in * gamma(0)) : CBlockMatrix(in * inv_gamma(0));

  if (resolve(backend, n) == TransformBackend::Fft) {
    parallel_chunks(workers, static_cast<std::size_t>(in.rows()), [&](std::size_t b, std::size_t e) {
      Eigen::FFT<double> fft;
      std::vector<Complex> src(n), dst(n);
      for (std::size_t i = b; i < e; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        if (dir == Direction::Forward) {
          for (int r = 0; r < n; ++r) src[r] = in(row, r) * gamma(r);
          fft.inv(dst, src);
          for (int r = 0; r < n; ++r) out(row, r) = dst[r] * root_n;
        } else {
          for (int r = 0; r < n; ++r) src[r] = in(row, r);
          fft.fwd(dst, src);
          for (int r = 0; r < n; ++r) out(row, r) = dst[r] * (inv_gamma(r) / root_n);
        }
      }
    });
    return out;
  }

  const CMatrix f = dft_matrix(n);
  parallel_chunks(workers, static_cast<std::size_t>(in.rows()), [&](std::size_t b, std::size_t e) {
    const auto rows = static_cast<Eigen::Index>(e - b);
    const auto first = static_cast<Eigen::Index>(b);
    if (dir == Direction::Forward) {
      out.middleRows(first, rows) = (in.middleRows(first, rows) * gamma.asDiagonal()) * f;
    } else {
      out.middleRows(first, rows) = (in.middleRows(first, rows) * f.conjugate()) * inv_gamma.asDiagonal();
    }
  });
  return out;
}

}  // namespace

Vector AlphaCirculant::first_col_c3() const {
  Vector c = Vector::Zero(n_t);
  if (n_t >= 2) c(1) = 1.0;
  return c;
}

Matrix alpha_circulant_matrix(const Vector& first_col, double alpha) {
  const auto n = first_col.size();
  Matrix c(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      c(i, j) = i >= j ? first_col(i - j) : alpha * first_col(n + i - j);
    }
  }
  return c;
}

BlockMatrix apply_circulant(const Vector& first_col, double alpha, const BlockMatrix& u) {
  const auto n = first_col.size();
  if (u.cols() != n) throw ShapeError("apply_circulant: block count does not match the circulant size");
  BlockMatrix out = BlockMatrix::Zero(u.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double c = first_col(k);
    if (c == 0.0) continue;
    for (Eigen::Index col = 0; col < n; ++col) {
      const Eigen::Index src = col - k;
      if (src >= 0) {
        out.col(col) += c * u.col(src);
      } else {
        out.col(col) += (alpha * c) * u.col(src + n);
      }
    }
  }
  return out;
}

Matrix AlphaCirculant::c1() const { return alpha_circulant_matrix(first_col_c1, alpha); }
Matrix AlphaCirculant::c2() const { return alpha_circulant_matrix(first_col_c2, alpha); }
Matrix AlphaCirculant::c3() const { return alpha_circulant_matrix(first_col_c3(), alpha); }

AlphaCirculant build_circulants(int n_t, double alpha, double dt, double theta,
                                bool allow_single_step) {
  if (n_t < (allow_single_step ? 1 : 2)) {
    throw std::invalid_argument("need at least two time steps, got n_t = " + std::to_string(n_t));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");
  if (alpha < 1e-3) warn("alpha below 1e-3; roundoff in the scaled transforms grows like 1/alpha");

  AlphaCirculant ac;
  ac.n_t = n_t;
  ac.alpha = alpha;
  ac.dt = dt;
  ac.theta = theta;
  ac.first_col_c1 = Vector::Zero(n_t);
  ac.first_col_c2 = Vector::Zero(n_t);
  if (n_t == 1) {
    // Both the diagonal and the wrap-around land on the single entry.
    ac.first_col_c1(0) = (1.0 - alpha) / dt;
    ac.first_col_c2(0) = theta + (1.0 - theta) * alpha;
    return ac;
  }
  ac.first_col_c1(0) = 1.0 / dt;
  ac.first_col_c1(1) = -1.0 / dt;
  ac.first_col_c2(0) = theta;
  ac.first_col_c2(1) = 1.0 - theta;
  return ac;
}

Vector gamma_scaling(int n_t, double alpha) {
  Vector g(n_t);
  const double log_root = std::log(alpha) / n_t;
  for (int r = 0; r < n_t; ++r) g(r) = std::exp(r * log_root);
  return g;
}

CVector circulant_eigenvalues(const Vector& first_col, const Vector& gamma, TransformBackend backend) {
  const int n = static_cast<int>(first_col.size());
  // sqrt(n) F (gamma .* c) is sqrt(n) times the forward row transform.
  CBlockMatrix row = first_col.cast<Complex>().transpose();
  const CBlockMatrix t = transform_rows(row, gamma, Direction::Forward, backend, 1);
  return t.row(0).transpose() * std::sqrt(static_cast<double>(n));
}

DiagonalizationData diagonalize(const AlphaCirculant& ac, TransformBackend backend) {
  DiagonalizationData d;
  d.n_t = ac.n_t;
  d.alpha = ac.alpha;
  d.gamma = gamma_scaling(ac.n_t, ac.alpha);
  d.eigs_c1 = circulant_eigenvalues(ac.first_col_c1, d.gamma, backend);
  d.eigs_c2 = circulant_eigenvalues(ac.first_col_c2, d.gamma, backend);
  if (ac.n_t == 1) {
    d.eigs_c3 = CVector::Constant(1, Complex(ac.alpha, 0.0));
  } else {
    d.eigs_c3 = circulant_eigenvalues(ac.first_col_c3(), d.gamma, backend);
  }
  return d;
}

CMatrix eigenvector_matrix(int n_t, double alpha) {
  const Vector g = gamma_scaling(n_t, alpha);
  return g.cwiseInverse().asDiagonal() * dft_matrix(n_t).adjoint();
}

CBlockMatrix step1_transform(const CBlockMatrix& b, const Vector& gamma, TransformBackend backend,
                             int workers) {
  return transform_rows(b, gamma, Direction::Forward, backend, workers);
}

CBlockMatrix step3_transform(const CBlockMatrix& s, const Vector& gamma, TransformBackend backend,
                             int workers) {
  return transform_rows(s, gamma, Direction::Backward, backend, workers);
}

}  // namespace pint
