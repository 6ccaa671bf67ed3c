#pragma once

#include <algorithm>
#include <cstddef>

#include "msexp/common.hpp"
#include "msexp/linalg/sparse.hpp"

namespace msexp {

/// Dense row-major matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int n_rows, int n_cols, double fill = 0.0)
      : n_rows_(n_rows), n_cols_(n_cols), values_(static_cast<std::size_t>(n_rows) * n_cols, fill) {}

  int rows() const { return n_rows_; }
  int cols() const { return n_cols_; }

  double& operator()(int i, int j) { return values_[static_cast<std::size_t>(i) * n_cols_ + j]; }
  double operator()(int i, int j) const {
    return values_[static_cast<std::size_t>(i) * n_cols_ + j];
  }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  static DenseMatrix identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static DenseMatrix from_sparse(const SparseMatrix& a) {
    DenseMatrix m(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k)
        m(i, a.col_indices()[k]) = a.values()[k];
    return m;
  }

  DenseMatrix transposed() const {
    DenseMatrix t(n_cols_, n_rows_);
    for (int i = 0; i < n_rows_; ++i)
      for (int j = 0; j < n_cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  void apply(const Vector& x, Vector& y) const {
    require(static_cast<int>(x.size()) == n_cols_, "DenseMatrix::apply: size mismatch");
    y.assign(n_rows_, 0.0);
    for (int i = 0; i < n_rows_; ++i) {
      double s = 0.0;
      const double* row = &values_[static_cast<std::size_t>(i) * n_cols_];
      for (int j = 0; j < n_cols_; ++j) s += row[j] * x[j];
      y[i] = s;
    }
  }

  Vector apply(const Vector& x) const {
    Vector y;
    apply(x, y);
    return y;
  }

  void apply_transpose(const Vector& x, Vector& y) const {
    require(static_cast<int>(x.size()) == n_rows_, "DenseMatrix::apply_transpose: size mismatch");
    y.assign(n_cols_, 0.0);
    for (int i = 0; i < n_rows_; ++i) {
      const double xi = x[i];
      const double* row = &values_[static_cast<std::size_t>(i) * n_cols_];
      for (int j = 0; j < n_cols_; ++j) y[j] += row[j] * xi;
    }
  }

  Vector apply_transpose(const Vector& x) const {
    Vector y;
    apply_transpose(x, y);
    return y;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
  }

 private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<double> values_;
};

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

/// In-place lower Cholesky factorization A = L L^T. Returns false when a
/// nonpositive pivot is met (A not positive definite).
class DenseCholesky {
 public:
  explicit DenseCholesky(const DenseMatrix& a) : l_(a), ok_(true) {
    require(a.rows() == a.cols(), "DenseCholesky: matrix not square");
    const int n = a.rows();
    for (int j = 0; j < n; ++j) {
      double d = l_(j, j);
      for (int k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
      if (!(d > 0.0)) {
        ok_ = false;
        return;
      }
      const double ljj = std::sqrt(d);
      l_(j, j) = ljj;
      for (int i = j + 1; i < n; ++i) {
        double s = l_(i, j);
        for (int k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
        l_(i, j) = s / ljj;
      }
    }
    // zero strict upper triangle so l_ really is L
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) l_(i, j) = 0.0;
  }

  bool ok() const { return ok_; }
  const DenseMatrix& lower() const { return l_; }

  /// x = A^{-1} b via forward/back substitution.
  Vector solve(const Vector& b) const {
    require(ok_, "DenseCholesky::solve: factorization failed");
    const int n = l_.rows();
    require(static_cast<int>(b.size()) == n, "DenseCholesky::solve: size mismatch");
    Vector x(b);
    for (int i = 0; i < n; ++i) {
      double s = x[i];
      for (int k = 0; k < i; ++k) s -= l_(i, k) * x[k];
      x[i] = s / l_(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = x[i];
      for (int k = i + 1; k < n; ++k) s -= l_(k, i) * x[k];
      x[i] = s / l_(i, i);
    }
    return x;
  }

  /// Solves L y = b (forward substitution only).
  Vector solve_lower(const Vector& b) const {
    require(ok_, "DenseCholesky::solve_lower: factorization failed");
    const int n = l_.rows();
    Vector y(b);
    for (int i = 0; i < n; ++i) {
      double s = y[i];
      for (int k = 0; k < i; ++k) s -= l_(i, k) * y[k];
      y[i] = s / l_(i, i);
    }
    return y;
  }

  /// Solves L^T x = b (back substitution only).
  Vector solve_upper(const Vector& b) const {
    require(ok_, "DenseCholesky::solve_upper: factorization failed");
    const int n = l_.rows();
    Vector x(b);
    for (int i = n - 1; i >= 0; --i) {
      double s = x[i];
      for (int k = i + 1; k < n; ++k) s -= l_(k, i) * x[k];
      x[i] = s / l_(i, i);
    }
    return x;
  }

 private:
  DenseMatrix l_;
  bool ok_;
};

}  // namespace msexp
