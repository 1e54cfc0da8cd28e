#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace pint {

/// Banded LU with partial pivoting (the unblocked LAPACK gbtf2/gbtrs scheme).
///
/// Element (i, j) with i - j <= kl and j - i <= ku lives at column j, row
/// kl + ku + i - j of a column-major array with 2*kl + ku + 1 rows. The top kl
/// rows of each column start out zero and absorb the fill-in from row swaps.
template <typename T>
class BandLU {
 public:
  BandLU() = default;
  BandLU(int n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
        ab_(static_cast<std::size_t>(ldab_) * n, T(0)), ipiv_(n, 0) {}

  [[nodiscard]] int size() const { return n_; }
  [[nodiscard]] int lower() const { return kl_; }
  [[nodiscard]] int upper() const { return ku_; }
  [[nodiscard]] std::size_t storage_size() const { return ab_.size(); }

  // Raw storage, for callers that assemble many matrices with one pattern.
  [[nodiscard]] T* storage() { return ab_.data(); }
  [[nodiscard]] std::size_t offset(int i, int j) const {
    return static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j);
  }

  T& at(int i, int j) { return ab_[offset(i, j)]; }
  [[nodiscard]] const T& at(int i, int j) const { return ab_[offset(i, j)]; }

  void set_zero() { std::fill(ab_.begin(), ab_.end(), T(0)); }

  /// Copies a sparse matrix into band storage; entries outside the band are ignored.
  template <typename S>
  void assign(const Eigen::SparseMatrix<S>& a) {
    set_zero();
    for (int j = 0; j < a.outerSize(); ++j) {
      for (typename Eigen::SparseMatrix<S>::InnerIterator it(a, j); it; ++it) {
        const int i = static_cast<int>(it.row());
        const int c = static_cast<int>(it.col());
        if (i - c <= kl_ && c - i <= ku_) at(i, c) = T(it.value());
      }
    }
  }

  /// In-place factorization. Returns the index of the first exactly-zero pivot,
  /// or -1 on success.
  int factorize() {
    int ju = 0;
    for (int j = 0; j < n_; ++j) {
      const int km = std::min(kl_, n_ - 1 - j);
      int jp = 0;
      double best = std::abs(at(j, j));
      for (int r = 1; r <= km; ++r) {
        const double v = std::abs(at(j + r, j));
        if (v > best) {
          best = v;
          jp = r;
        }
      }
      ipiv_[j] = j + jp;
      if (best == 0.0) return j;
      ju = std::max(ju, std::min(j + ku_ + jp, n_ - 1));
      if (jp != 0) {
        for (int c = j; c <= ju; ++c) std::swap(at(j + jp, c), at(j, c));
      }
      if (km > 0) {
        const T inv = T(1) / at(j, j);
        T* col = &at(j + 1, j);
        for (int r = 0; r < km; ++r) col[r] *= inv;
        for (int c = j + 1; c <= ju; ++c) {
          const T t = at(j, c);
          if (t == T(0)) continue;
          T* target = &at(j + 1, c);
          for (int r = 0; r < km; ++r) target[r] -= col[r] * t;
        }
      }
    }
    return -1;
  }

  /// Solves with the factors in place; x holds the right-hand side on entry.
  template <typename Derived>
  void solve_in_place(Eigen::MatrixBase<Derived>& x) const {
    const int kv = kl_ + ku_;
    for (int j = 0; j + 1 < n_; ++j) {
      const int km = std::min(kl_, n_ - 1 - j);
      const int l = ipiv_[j];
      if (l != j) std::swap(x(l), x(j));
      const T xj = x(j);
      if (xj == T(0)) continue;
      const T* col = &at(j + 1, j);
      for (int r = 0; r < km; ++r) x(j + 1 + r) -= col[r] * xj;
    }
    for (int j = n_ - 1; j >= 0; --j) {
      x(j) /= at(j, j);
      const T xj = x(j);
      if (xj == T(0)) continue;
      const int i0 = std::max(0, j - kv);
      for (int i = i0; i < j; ++i) x(i) -= at(i, j) * xj;
    }
  }

 private:
  int n_ = 0;
  int kl_ = 0;
  int ku_ = 0;
  int ldab_ = 1;
  std::vector<T> ab_;
  std::vector<int> ipiv_;
};

/// Largest |i - j| over the stored entries of a sparse matrix.
template <typename S>
int bandwidth(const Eigen::SparseMatrix<S>& a) {
  int bw = 0;
  for (int j = 0; j < a.outerSize(); ++j) {
    for (typename Eigen::SparseMatrix<S>::InnerIterator it(a, j); it; ++it) {
      bw = std::max(bw, std::abs(static_cast<int>(it.row()) - static_cast<int>(it.col())));
    }
  }
  return bw;
}

}  // namespace pint
