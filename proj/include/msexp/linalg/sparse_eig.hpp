#pragma once

#include <algorithm>

#include "msexp/common.hpp"
#include "msexp/linalg/dense.hpp"
#include "msexp/linalg/eig.hpp"
#include "msexp/linalg/skyline.hpp"
#include "msexp/linalg/sparse.hpp"

namespace msexp {

/// Lowest eigenpairs of the sparse pencil A q = lambda M q (A symmetric
/// positive semidefinite, M symmetric positive definite).
///
/// Small problems go through the dense Cholesky-reduction solver; larger
/// ones use shift-invert block subspace iteration: factor K = A + sigma M
/// once, then iterate Y <- K^{-1} M X with Rayleigh-Ritz extraction until
/// the leading residuals settle. Fully deterministic (fixed seed, fixed
/// summation order).
inline SymEigResult lowest_eigenpairs(const SparseMatrix& a, const SparseMatrix& m, int n_pairs,
                                      double tol = 1e-10, int max_iters = 400) {
  const int n = a.rows();
  require(a.cols() == n && m.rows() == n && m.cols() == n,
          "lowest_eigenpairs: dimension mismatch");
  require(n_pairs >= 1 && n_pairs <= n, "lowest_eigenpairs: invalid pair count");

  const int block = std::min(n, 2 * n_pairs + 8);
  constexpr int kDenseCutoff = 350;
  if (n <= kDenseCutoff || block >= n) {
    SymEigResult full = sym_generalized_eig(DenseMatrix::from_sparse(a), DenseMatrix::from_sparse(m));
    SymEigResult out;
    out.eigenvalues.assign(full.eigenvalues.begin(), full.eigenvalues.begin() + n_pairs);
    out.eigenvectors = DenseMatrix(n, n_pairs);
    for (int j = 0; j < n_pairs; ++j)
      for (int i = 0; i < n; ++i) out.eigenvectors(i, j) = full.eigenvectors(i, j);
    return out;
  }

  // The trace ratio tracks the mean pencil eigenvalue, far above the low
  // modes we want; a small fraction of it keeps K = A + sigma M safely
  // positive definite while the shift-inverted spectrum still separates the
  // low end strongly.
  double trace_a = 0.0, trace_m = 0.0;
  for (int i = 0; i < n; ++i) {
    trace_a += a.value_at(i, i);
    trace_m += m.value_at(i, i);
  }
  const double sigma = trace_a > 0.0 ? 1e-6 * trace_a / trace_m : 1.0;

  // K = A + sigma M
  SkylineCholesky shifted = [&] {
    std::vector<Triplet> t;
    t.reserve(a.nnz() + m.nnz());
    for (int i = 0; i < n; ++i) {
      for (int k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k)
        t.push_back({i, a.col_indices()[k], a.values()[k]});
      for (int k = m.row_offsets()[i]; k < m.row_offsets()[i + 1]; ++k)
        t.push_back({i, m.col_indices()[k], sigma * m.values()[k]});
    }
    return SkylineCholesky(csr_from_triplets(t, n, n));
  }();

  // start block: the constant vector plus deterministic noise
  std::vector<Vector> x(block, Vector(n));
  {
    Rng rng(0x1f2e3d4c5b6a7988ULL);
    for (int i = 0; i < n; ++i) x[0][i] = 1.0;
    for (int j = 1; j < block; ++j)
      for (int i = 0; i < n; ++i) x[j][i] = rng.uniform(-1.0, 1.0);
  }

  const double a_scale = a.frobenius_norm();
  Vector ritz(block, 0.0);
  Vector tmp;

  for (int iter = 0; iter < max_iters; ++iter) {
    // Y = K^{-1} M X
    for (int j = 0; j < block; ++j) {
      m.apply(x[j], tmp);
      x[j] = shifted.solve(tmp);
    }

    // M-orthonormalize the block via the Cholesky of its Gram matrix.
    std::vector<Vector> mx(block);
    for (int j = 0; j < block; ++j) m.apply(x[j], mx[j]);
    DenseMatrix gram(block, block);
    for (int i = 0; i < block; ++i)
      for (int j = 0; j <= i; ++j) gram(i, j) = gram(j, i) = dot(x[i], mx[j]);
    DenseCholesky gchol(gram);
    if (!gchol.ok()) {
      // block went rank deficient; perturb deterministically and retry
      Rng rng(0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(iter));
      for (int j = 1; j < block; ++j)
        for (int i = 0; i < n; ++i) x[j][i] += 1e-8 * rng.uniform(-1.0, 1.0);
      continue;
    }
    // X <- X L^{-T}: columns x_new[j] = sum_i x[i] * (L^{-T})(i,j)
    {
      // solve L^T c_j = e_j to get the columns of L^{-T}; cheap at block size
      std::vector<Vector> xn(block, Vector(n, 0.0));
      for (int j = 0; j < block; ++j) {
        Vector ej(block, 0.0);
        ej[j] = 1.0;
        Vector cj = gchol.solve_upper(ej);
        for (int i = 0; i < block; ++i)
          if (cj[i] != 0.0) axpy(cj[i], x[i], xn[j]);
      }
      x.swap(xn);
    }

    // Rayleigh-Ritz: H = X^T A X, rotate by its eigenvectors.
    std::vector<Vector> ax(block);
    for (int j = 0; j < block; ++j) a.apply(x[j], ax[j]);
    DenseMatrix h(block, block);
    for (int i = 0; i < block; ++i)
      for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = 0.5 * (dot(x[i], ax[j]) + dot(x[j], ax[i]));
    SymEigResult small = sym_eig(h);
    {
      std::vector<Vector> xn(block, Vector(n, 0.0));
      for (int j = 0; j < block; ++j)
        for (int i = 0; i < block; ++i) {
          const double w = small.eigenvectors(i, j);
          if (w != 0.0) axpy(w, x[i], xn[j]);
        }
      x.swap(xn);
      ritz = small.eigenvalues;
    }

    // residual check on the pairs we will keep
    double worst = 0.0;
    for (int j = 0; j < n_pairs; ++j) {
      a.apply(x[j], tmp);
      Vector mxj;
      m.apply(x[j], mxj);
      axpy(-ritz[j], mxj, tmp);
      worst = std::max(worst, norm2(tmp));
    }
    if (worst <= tol * a_scale) break;
    if (iter == max_iters - 1 && worst > 1e-7 * a_scale)
      throw NumericalError("lowest_eigenpairs: subspace iteration stalled, residual " +
                           std::to_string(worst / a_scale) + " of ||A||_F");
  }

  SymEigResult out;
  out.eigenvalues.assign(ritz.begin(), ritz.begin() + n_pairs);
  out.eigenvectors = DenseMatrix(n, n_pairs);
  for (int j = 0; j < n_pairs; ++j)
    for (int i = 0; i < n; ++i) out.eigenvectors(i, j) = x[j][i];
  detail::fix_column_signs(out.eigenvectors);
  return out;
}

}  // namespace msexp
