#pragma once

#include "msexp/common.hpp"
#include "msexp/linalg/sparse.hpp"

namespace msexp {

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite
/// systems. Returns x with ||A x - rhs||_2 <= tol * ||rhs||_2, or throws a
/// NumericalError (with the residual reached) if the iteration cap is hit.
inline Vector spd_solve(const SparseMatrix& a, const Vector& rhs, double tol,
                        int max_iters = 0) {
  require(a.rows() == a.cols(), "spd_solve: matrix not square");
  require(static_cast<int>(rhs.size()) == a.rows(), "spd_solve: rhs size mismatch");
  require(tol > 0.0, "spd_solve: tol must be positive");

  const int n = a.rows();
  if (max_iters <= 0) max_iters = 20 * n + 200;

  const double rhs_norm = norm2(rhs);
  Vector x(n, 0.0);
  if (rhs_norm == 0.0) return x;

  Vector inv_diag(n);
  {
    Vector d = a.diagonal();
    for (int i = 0; i < n; ++i) {
      if (!(d[i] > 0.0))
        throw NumericalError("spd_solve: nonpositive diagonal entry at " + std::to_string(i));
      inv_diag[i] = 1.0 / d[i];
    }
  }

  Vector r(rhs);
  Vector z(n), p(n), ap(n);
  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);

  for (int it = 0; it < max_iters; ++it) {
    a.apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0))
      throw NumericalError("spd_solve: curvature <= 0, matrix appears indefinite");
    const double alpha = rz / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    if (norm2(r) <= tol * rhs_norm) return x;
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw NumericalError("spd_solve: no convergence after " + std::to_string(max_iters) +
                       " iterations, residual " + std::to_string(norm2(r) / rhs_norm) +
                       " (relative)");
}

}  // namespace msexp
