#pragma once

#include <algorithm>

#include "msexp/common.hpp"
#include "msexp/linalg/sparse.hpp"

namespace msexp {

/// Envelope (skyline) Cholesky factorization of a sparse SPD matrix.
/// Stores, per row, the profile from the first structurally nonzero column
/// up to the diagonal. Fill-in stays inside the envelope, which suits the
/// banded matrices coming from structured-grid assembly.
class SkylineCholesky {
 public:
  explicit SkylineCholesky(const SparseMatrix& a) {
    require(a.rows() == a.cols(), "SkylineCholesky: matrix not square");
    n_ = a.rows();
    first_.assign(n_, 0);
    for (int i = 0; i < n_; ++i) {
      int f = i;
      const int b = a.row_offsets()[i];
      const int e = a.row_offsets()[i + 1];
      if (b < e) f = std::min(f, a.col_indices()[b]);
      first_[i] = f;
    }
    // Symmetrize the profile: an entry (i,j), j>i, widens row j's envelope.
    for (int i = 0; i < n_; ++i)
      for (int k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) {
        const int j = a.col_indices()[k];
        if (j > i) first_[j] = std::min(first_[j], i);
      }

    pos_.assign(n_ + 1, 0);
    for (int i = 0; i < n_; ++i) pos_[i + 1] = pos_[i] + (i - first_[i] + 1);
    vals_.assign(pos_[n_], 0.0);

    for (int i = 0; i < n_; ++i)
      for (int k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) {
        const int j = a.col_indices()[k];
        if (j <= i) at(i, j) = a.values()[k];
      }

    factorize();
  }

  int size() const { return n_; }

  Vector solve(const Vector& b) const {
    require(static_cast<int>(b.size()) == n_, "SkylineCholesky::solve: size mismatch");
    Vector x(b);
    // forward: L y = b
    for (int i = 0; i < n_; ++i) {
      double s = x[i];
      const double* row = &vals_[pos_[i]];
      const int f = first_[i];
      for (int k = f; k < i; ++k) s -= row[k - f] * x[k];
      x[i] = s / row[i - f];
    }
    // backward: L^T x = y (column sweep)
    for (int i = n_ - 1; i >= 0; --i) {
      const double* row = &vals_[pos_[i]];
      const int f = first_[i];
      x[i] /= row[i - f];
      const double xi = x[i];
      for (int k = f; k < i; ++k) x[k] -= row[k - f] * xi;
    }
    return x;
  }

 private:
  double& at(int i, int j) { return vals_[pos_[i] + (j - first_[i])]; }

  void factorize() {
    for (int i = 0; i < n_; ++i) {
      const int fi = first_[i];
      double* ri = &vals_[pos_[i]];
      for (int j = fi; j < i; ++j) {
        const int fj = first_[j];
        const double* rj = &vals_[pos_[j]];
        const int k0 = std::max(fi, fj);
        double s = ri[j - fi];
        for (int k = k0; k < j; ++k) s -= ri[k - fi] * rj[k - fj];
        ri[j - fi] = s / rj[j - fj];
      }
      double d = ri[i - fi];
      for (int k = fi; k < i; ++k) d -= ri[k - fi] * ri[k - fi];
      if (!(d > 0.0))
        throw NumericalError("SkylineCholesky: nonpositive pivot at row " + std::to_string(i) +
                             " (matrix not positive definite)");
      ri[i - fi] = std::sqrt(d);
    }
  }

  int n_ = 0;
  std::vector<int> first_;
  std::vector<int> pos_;
  std::vector<double> vals_;
};

}  // namespace msexp
