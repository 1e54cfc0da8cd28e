#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <complex>
#include <stdexcept>
#include <string>

namespace pint {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Block layout used throughout: column n holds the spatial vector of time
/// index n, so a space-time vector with n_t blocks is an n_dof x n_t matrix.
using BlockMatrix = Eigen::MatrixXd;
using CBlockMatrix = Eigen::MatrixXcd;

// Extended precision, used only to evaluate nonlinear residuals.
using ExtVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
using ExtBlockMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using ExtSparseMatrix = Eigen::SparseMatrix<long double>;

/// Equidistant tensor grid with n_x points per direction.
struct Grid {
  int dim = 1;
  int n_x = 0;
  double h = 0.0;

  [[nodiscard]] int n_dof() const { return dim == 1 ? n_x : n_x * n_x; }
  [[nodiscard]] double length() const { return h * (n_x - 1); }
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  [[nodiscard]] double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace pint
