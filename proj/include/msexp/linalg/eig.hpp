#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "msexp/common.hpp"
#include "msexp/linalg/dense.hpp"

namespace msexp {

namespace detail {

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// On exit z holds the accumulated orthogonal transform Q with
/// Q^T A Q = tridiag(d, e); e[0] = 0, subdiagonal in e[1..n-1].
inline void tridiagonalize(DenseMatrix& z, Vector& d, Vector& e) {
  const int n = z.rows();
  d.assign(n, 0.0);
  e.assign(n, 0.0);

  for (int i = n - 1; i >= 1; --i) {
    const int l = i - 1;
    double h = 0.0;
    if (l > 0) {
      double scale = 0.0;
      for (int k = 0; k <= l; ++k) scale += std::abs(z(i, k));
      if (scale == 0.0) {
        e[i] = z(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          z(j, i) = z(i, j) / h;  // stash u/H for accumulation
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
          for (int k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
          e[j] = g / h;
          f += e[j] * z(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = z(i, j);
          g = e[j] - hh * f;
          e[j] = g;
          for (int k = 0; k <= j; ++k) z(j, k) -= f * e[k] + g * z(i, k);
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;

  // accumulate transformations
  for (int i = 0; i < n; ++i) {
    const int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += z(i, k) * z(k, j);
        for (int k = 0; k <= l; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d[i] = z(i, i);
    z(i, i) = 1.0;
    for (int j = 0; j <= l; ++j) z(j, i) = z(i, j) = 0.0;
  }
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix.
/// Eigenvalues land in d; the rotations are accumulated into the columns
/// of z (so z columns become eigenvectors of the original matrix).
inline void ql_implicit(Vector& d, Vector& e, DenseMatrix& z) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return;
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    while (true) {
      int m = l;
      for (; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (iter++ == 60)
        throw NumericalError("ql_implicit: no convergence after 60 iterations");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      int i = m - 1;
      bool underflow = false;
      for (; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        for (int k = 0; k < n; ++k) {
          f = z(k, i + 1);
          z(k, i + 1) = s * z(k, i) + c * f;
          z(k, i) = c * z(k, i) - s * f;
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

inline void fix_column_signs(DenseMatrix& q) {
  for (int j = 0; j < q.cols(); ++j) {
    int arg = 0;
    double best = 0.0;
    for (int i = 0; i < q.rows(); ++i) {
      const double a = std::abs(q(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (q(arg, j) < 0.0)
      for (int i = 0; i < q.rows(); ++i) q(i, j) = -q(i, j);
  }
}

/// Row-oriented forward substitution: X <- L^{-1} X.
inline void solve_lower_rows(const DenseMatrix& l, DenseMatrix& x) {
  const int n = l.rows();
  for (int i = 0; i < n; ++i) {
    double* xi = &x.values()[static_cast<std::size_t>(i) * x.cols()];
    for (int k = 0; k < i; ++k) {
      const double lik = l(i, k);
      if (lik == 0.0) continue;
      const double* xk = &x.values()[static_cast<std::size_t>(k) * x.cols()];
      for (int j = 0; j < x.cols(); ++j) xi[j] -= lik * xk[j];
    }
    const double inv = 1.0 / l(i, i);
    for (int j = 0; j < x.cols(); ++j) xi[j] *= inv;
  }
}

/// Row-oriented back substitution: X <- L^{-T} X.
inline void solve_upper_rows(const DenseMatrix& l, DenseMatrix& x) {
  const int n = l.rows();
  for (int i = n - 1; i >= 0; --i) {
    double* xi = &x.values()[static_cast<std::size_t>(i) * x.cols()];
    for (int k = i + 1; k < n; ++k) {
      const double lki = l(k, i);
      if (lki == 0.0) continue;
      const double* xk = &x.values()[static_cast<std::size_t>(k) * x.cols()];
      for (int j = 0; j < x.cols(); ++j) xi[j] -= lki * xk[j];
    }
    const double inv = 1.0 / l(i, i);
    for (int j = 0; j < x.cols(); ++j) xi[j] *= inv;
  }
}

}  // namespace detail

struct SymEigResult {
  Vector eigenvalues;     // ascending
  DenseMatrix eigenvectors;  // columns, orthonormal in the relevant inner product
};

/// Full spectrum of a symmetric matrix (ascending, orthonormal columns).
inline SymEigResult sym_eig(const DenseMatrix& a) {
  require(a.rows() == a.cols(), "sym_eig: matrix not square");
  const int n = a.rows();
  DenseMatrix z(a);
  Vector d, e;
  detail::tridiagonalize(z, d, e);
  detail::ql_implicit(d, e, z);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return d[x] < d[y]; });

  SymEigResult res;
  res.eigenvalues.resize(n);
  res.eigenvectors = DenseMatrix(n, n);
  for (int j = 0; j < n; ++j) {
    res.eigenvalues[j] = d[order[j]];
    for (int i = 0; i < n; ++i) res.eigenvectors(i, j) = z(i, order[j]);
  }
  detail::fix_column_signs(res.eigenvectors);
  return res;
}

/// Solves A q = lambda M q for symmetric A (positive semidefinite) and
/// symmetric positive definite M via the Cholesky reduction
/// L^{-1} A L^{-T} y = lambda y, q = L^{-T} y. Eigenvalues ascending,
/// eigenvectors M-orthonormal, sign fixed so the largest-magnitude
/// component of each eigenvector is positive.
inline SymEigResult sym_generalized_eig(const DenseMatrix& a, const DenseMatrix& m) {
  require(a.rows() == a.cols() && m.rows() == m.cols() && a.rows() == m.rows(),
          "sym_generalized_eig: dimension mismatch");
  DenseCholesky chol(m);
  if (!chol.ok())
    throw NumericalError("sym_generalized_eig: mass matrix not positive definite");
  const DenseMatrix& l = chol.lower();

  // B = L^{-1} A L^{-T}
  DenseMatrix x(a);
  detail::solve_lower_rows(l, x);       // X = L^{-1} A
  DenseMatrix b = x.transposed();       // B0 = A L^{-T} (A symmetric)
  detail::solve_lower_rows(l, b);       // B = L^{-1} A L^{-T}
  const int n = b.rows();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (b(i, j) + b(j, i));
      b(i, j) = b(j, i) = v;
    }

  SymEigResult res = sym_eig(b);
  detail::solve_upper_rows(l, res.eigenvectors);  // Q = L^{-T} Y
  detail::fix_column_signs(res.eigenvectors);
  return res;
}

}  // namespace msexp
