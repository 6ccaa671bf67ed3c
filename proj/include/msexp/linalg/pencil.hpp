#pragma once

#include "msexp/common.hpp"
#include "msexp/linalg/dense.hpp"
#include "msexp/linalg/eig.hpp"
#include "msexp/linalg/phi.hpp"
#include "msexp/linalg/sparse.hpp"

namespace msexp {

/// Eigendecomposition of the coarse pencil -tau A0 q = lambda M0 q with
/// mass-orthonormal eigenvectors (Q^T M0 Q = I). Reused across all time
/// steps of an exponential-integrator run.
struct EigenPencilDecomp {
  Vector eigenvalues;        // diagonal of D0 = -tau * Lambda, ascending
  DenseMatrix eigenvectors;  // columns q_j
  SparseMatrix mass;         // M0
  double tau = 0.0;
};

/// Decomposes -tau A0 q = lambda M0 q. A0 must be symmetric positive
/// semidefinite and M0 symmetric positive definite, so all entries of D0
/// are nonpositive.
inline EigenPencilDecomp coarse_pencil_eig(const SparseMatrix& m0, const SparseMatrix& a0,
                                           double tau) {
  require(m0.rows() == m0.cols() && a0.rows() == a0.cols() && m0.rows() == a0.rows(),
          "coarse_pencil_eig: dimension mismatch");
  require(tau > 0.0, "coarse_pencil_eig: tau must be positive");

  SymEigResult eig = sym_generalized_eig(DenseMatrix::from_sparse(a0), DenseMatrix::from_sparse(m0));

  // A0 q = mu M0 q with mu >= 0 ascending maps to D0 = -tau*mu, which is
  // ascending when the mu order is reversed.
  const int n = static_cast<int>(eig.eigenvalues.size());
  EigenPencilDecomp d;
  d.tau = tau;
  d.mass = m0;
  d.eigenvalues.resize(n);
  d.eigenvectors = DenseMatrix(n, n);
  for (int j = 0; j < n; ++j) {
    const int src = n - 1 - j;
    d.eigenvalues[j] = -tau * eig.eigenvalues[src];
    for (int i = 0; i < n; ++i) d.eigenvectors(i, j) = eig.eigenvectors(i, src);
  }
  return d;
}

/// Same pencil at a different time step: eigenvectors are tau-independent,
/// the diagonal scales linearly.
inline EigenPencilDecomp with_time_step(const EigenPencilDecomp& d, double tau) {
  require(tau > 0.0, "with_time_step: tau must be positive");
  EigenPencilDecomp out = d;
  const double ratio = tau / d.tau;
  for (double& v : out.eigenvalues) v *= ratio;
  out.tau = tau;
  return out;
}

/// Returns Q0 phi_1(D0) Q0^T r with phi_1 applied entrywise to the diagonal.
inline Vector apply_phi1_pencil(const EigenPencilDecomp& d, const Vector& r) {
  require(static_cast<int>(r.size()) == d.eigenvectors.rows(),
          "apply_phi1_pencil: dimension mismatch");
  Vector t;
  d.eigenvectors.apply_transpose(r, t);
  for (std::size_t j = 0; j < t.size(); ++j) {
    // Tiny positive eigenvalues are factorization round-off of a
    // semidefinite pencil; clamp them into the phi domain.
    const double z = std::min(d.eigenvalues[j], 0.0);
    t[j] *= phi_scalar(1, z);
  }
  Vector y;
  d.eigenvectors.apply(t, y);
  return y;
}

/// Q0 exp(D0) Q0^T M0 r: the exact one-step propagator of the homogeneous
/// coarse flow. Exposed for semigroup checks.
inline Vector apply_exp_pencil(const EigenPencilDecomp& d, const Vector& r) {
  Vector mr = d.mass.apply(r);
  Vector t;
  d.eigenvectors.apply_transpose(mr, t);
  for (std::size_t j = 0; j < t.size(); ++j)
    t[j] *= std::exp(std::min(d.eigenvalues[j], 0.0));
  Vector y;
  d.eigenvectors.apply(t, y);
  return y;
}

}  // namespace msexp
