#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <utility>

#include "msexp/common.hpp"

namespace msexp {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row and no (row, col) pair is stored twice.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int n_rows, int n_cols)
      : n_rows_(n_rows), n_cols_(n_cols), row_offsets_(n_rows + 1, 0) {}

  int rows() const { return n_rows_; }
  int cols() const { return n_cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<int>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// y = A x
  void apply(const Vector& x, Vector& y) const {
    require(static_cast<int>(x.size()) == n_cols_, "SparseMatrix::apply: size mismatch");
    y.assign(n_rows_, 0.0);
    for (int i = 0; i < n_rows_; ++i) {
      double s = 0.0;
      for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        s += values_[k] * x[col_indices_[k]];
      y[i] = s;
    }
  }

  Vector apply(const Vector& x) const {
    Vector y;
    apply(x, y);
    return y;
  }

  /// y = A^T x (scatter form; deterministic row-major accumulation order)
  void apply_transpose(const Vector& x, Vector& y) const {
    require(static_cast<int>(x.size()) == n_rows_, "SparseMatrix::apply_transpose: size mismatch");
    y.assign(n_cols_, 0.0);
    for (int i = 0; i < n_rows_; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        y[col_indices_[k]] += values_[k] * xi;
    }
  }

  Vector apply_transpose(const Vector& x) const {
    Vector y;
    apply_transpose(x, y);
    return y;
  }

  double value_at(int row, int col) const {
    for (int k = row_offsets_[row]; k < row_offsets_[row + 1]; ++k)
      if (col_indices_[k] == col) return values_[k];
    return 0.0;
  }

  Vector diagonal() const {
    Vector d(std::min(n_rows_, n_cols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = value_at(static_cast<int>(i), static_cast<int>(i));
    return d;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
  }

  friend SparseMatrix csr_from_triplets(const std::vector<Triplet>& triplets, int n_rows,
                                        int n_cols, bool keep_zeros);

 private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

/// Builds a CSR matrix from (row, col, value) triplets. Duplicate positions
/// are summed. Entries that sum to exactly zero are dropped unless
/// keep_zeros is set.
inline SparseMatrix csr_from_triplets(const std::vector<Triplet>& triplets, int n_rows,
                                      int n_cols, bool keep_zeros = false) {
  require(n_rows >= 0 && n_cols >= 0, "csr_from_triplets: negative dimension");
  for (const Triplet& t : triplets)
    require(t.row >= 0 && t.row < n_rows && t.col >= 0 && t.col < n_cols,
            "csr_from_triplets: index out of bounds");

  // Sort-and-sum keeps the result independent of triplet order up to
  // floating-point association; a stable sort plus in-order accumulation
  // makes it fully deterministic for a fixed triplet sequence.
  std::vector<std::size_t> order(triplets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Triplet& ta = triplets[a];
    const Triplet& tb = triplets[b];
    return ta.row != tb.row ? ta.row < tb.row : ta.col < tb.col;
  });

  SparseMatrix m(n_rows, n_cols);
  std::vector<int> counts(n_rows, 0);
  std::vector<int> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());

  std::size_t k = 0;
  while (k < order.size()) {
    const int r = triplets[order[k]].row;
    const int c = triplets[order[k]].col;
    double s = 0.0;
    while (k < order.size() && triplets[order[k]].row == r && triplets[order[k]].col == c)
      s += triplets[order[k++]].value;
    if (s != 0.0 || keep_zeros) {
      cols.push_back(c);
      vals.push_back(s);
      ++counts[r];
    }
  }

  m.row_offsets_.assign(n_rows + 1, 0);
  for (int i = 0; i < n_rows; ++i) m.row_offsets_[i + 1] = m.row_offsets_[i] + counts[i];
  m.col_indices_ = std::move(cols);
  m.values_ = std::move(vals);
  return m;
}

inline SparseMatrix identity_csr(int n) {
  std::vector<Triplet> t(n);
  for (int i = 0; i < n; ++i) t[i] = {i, i, 1.0};
  return csr_from_triplets(t, n, n);
}

/// Maximum absolute asymmetry |A_ij - A_ji|; useful in assembly checks.
inline double max_asymmetry(const SparseMatrix& a) {
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k)
      m = std::max(m, std::abs(a.values()[k] - a.value_at(a.col_indices()[k], i)));
  return m;
}

}  // namespace msexp
