#pragma once

#include <chrono>
#include <functional>
#include <utility>

#include "msexp/basis/space.hpp"
#include "msexp/common.hpp"
#include "msexp/linalg/dense.hpp"
#include "msexp/linalg/pencil.hpp"
#include "msexp/linalg/skyline.hpp"
#include "msexp/time/grid.hpp"

namespace msexp {

/// Reduced load vector b(p) for the current reduced state; a null function
/// means f = 0.
using LoadFn = std::function<Vector(const Vector&)>;

struct SolveResult {
  Vector final_state;             // reduced fine-scale vector
  std::vector<Vector> snapshots;  // reduced fine-scale states at requested steps
  double wall_seconds = 0.0;
  int factorizations = 0;
  int linear_solves = 0;
};

namespace detail {

class StopWatch {
 public:
  StopWatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline SparseMatrix sparse_sum(const SparseMatrix& a, double beta, const SparseMatrix& b) {
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k)
      t.push_back({i, a.col_indices()[k], a.values()[k]});
    for (int k = b.row_offsets()[i]; k < b.row_offsets()[i + 1]; ++k)
      t.push_back({i, b.col_indices()[k], beta * b.values()[k]});
  }
  return csr_from_triplets(t, a.rows(), a.cols());
}

inline void maybe_snapshot(const std::vector<int>& wanted, int step, const Vector& state,
                           std::vector<Vector>& out) {
  for (int s : wanted)
    if (s == step) out.push_back(state);
}

}  // namespace detail

/// Backward Euler on the reduced fine-scale system:
/// (M + tau A) p^n = M p^{n-1} + tau b, the matrix factored once. The
/// nonlinear load is lagged; picard > 1 refreshes it against the newest
/// iterate within each step.
inline SolveResult fine_backward_euler(const SparseMatrix& m, const SparseMatrix& a,
                                       const LoadFn& load, const Vector& p0, const TimeGrid& grid,
                                       const std::vector<int>& snapshot_steps = {},
                                       int picard = 1) {
  require(m.rows() == a.rows() && m.rows() == static_cast<int>(p0.size()),
          "fine_backward_euler: dimension mismatch");
  require(picard >= 1, "fine_backward_euler: picard count must be >= 1");

  detail::StopWatch watch;
  SolveResult result;
  SkylineCholesky factor(detail::sparse_sum(m, grid.tau, a));
  result.factorizations = 1;

  Vector p(p0);
  detail::maybe_snapshot(snapshot_steps, 0, p, result.snapshots);
  Vector mp;
  for (int step = 1; step <= grid.n_steps; ++step) {
    m.apply(p, mp);
    Vector p_next = p;
    for (int it = 0; it < picard; ++it) {
      Vector rhs = mp;
      if (load) axpy(grid.tau, load(it == 0 ? p : p_next), rhs);
      p_next = factor.solve(rhs);
      ++result.linear_solves;
      if (!load) break;
    }
    p = std::move(p_next);
    detail::maybe_snapshot(snapshot_steps, step, p, result.snapshots);
  }
  result.final_state = std::move(p);
  result.wall_seconds = watch.seconds();
  return result;
}

/// Coarse coordinates of the mass-orthogonal projection M0^{-1} R0 M p0.
inline Vector project_initial_coarse(const MultiscaleSpace& space, const SparseMatrix& m,
                                     const SparseMatrix& m0, const Vector& p0) {
  require(static_cast<int>(p0.size()) == space.n_interior, "project_initial: p0 not reduced");
  DenseCholesky chol(DenseMatrix::from_sparse(m0));
  if (!chol.ok())
    throw NumericalError("project_initial: coarse mass matrix not positive definite "
                         "(multiscale space is rank deficient)");
  return chol.solve(restrict_to_coarse(space, m.apply(p0)));
}

/// Fine-scale projected initial state R0^T M0^{-1} R0 M p0.
inline Vector project_initial(const MultiscaleSpace& space, const SparseMatrix& m,
                              const SparseMatrix& m0, const Vector& p0) {
  return prolongate(space, project_initial_coarse(space, m, m0, p0));
}

/// Backward Euler on the projected system:
/// (M0 + tau A0) c^n = M0 c^{n-1} + tau R0 b(R0^T c^{n-1}).
/// States are reported prolongated to the fine scale. This overload takes
/// precomputed coarse matrices so sweeps can share them.
inline SolveResult mfgmsfem_fd_run(const MultiscaleSpace& space, const SparseMatrix& m,
                                   const SparseMatrix& a, const SparseMatrix& m0,
                                   const SparseMatrix& a0, const LoadFn& load, const Vector& p0,
                                   const TimeGrid& grid,
                                   const std::vector<int>& snapshot_steps = {}, int picard = 1) {
  (void)a;
  require(picard >= 1, "mfgmsfem_fd_run: picard count must be >= 1");
  detail::StopWatch watch;
  SolveResult result;

  Vector c = project_initial_coarse(space, m, m0, p0);

  DenseCholesky factor(DenseMatrix::from_sparse(detail::sparse_sum(m0, grid.tau, a0)));
  if (!factor.ok())
    throw NumericalError("mfgmsfem_fd_run: coarse system matrix not positive definite");
  result.factorizations = 1;

  detail::maybe_snapshot(snapshot_steps, 0, prolongate(space, c), result.snapshots);
  Vector m0c;
  for (int step = 1; step <= grid.n_steps; ++step) {
    m0.apply(c, m0c);
    Vector c_next = c;
    for (int it = 0; it < picard; ++it) {
      Vector rhs = m0c;
      if (load)
        axpy(grid.tau, restrict_to_coarse(space, load(prolongate(space, it == 0 ? c : c_next))),
             rhs);
      c_next = factor.solve(rhs);
      ++result.linear_solves;
      if (!load) break;
    }
    c = std::move(c_next);
    detail::maybe_snapshot(snapshot_steps, step, prolongate(space, c), result.snapshots);
  }
  result.final_state = prolongate(space, c);
  result.wall_seconds = watch.seconds();
  return result;
}

inline SolveResult mfgmsfem_fd_run(const MultiscaleSpace& space, const SparseMatrix& m,
                                   const SparseMatrix& a, const LoadFn& load, const Vector& p0,
                                   const TimeGrid& grid,
                                   const std::vector<int>& snapshot_steps = {}, int picard = 1) {
  auto [m0, a0] = coarse_matrices(space, m, a);
  return mfgmsfem_fd_run(space, m, a, m0, a0, load, p0, grid, snapshot_steps, picard);
}

/// Exponential Euler on the projected system, evaluated through the pencil
/// eigendecomposition. Per step:
///   r = b(p) - A p,  p <- p + tau R0^T Q0 phi_1(D0) Q0^T R0 r.
/// The initial state is the projected one; with f = 0 the step is the exact
/// propagator of the coarse flow.
inline SolveResult mfgmsfem_ei_run(const MultiscaleSpace& space, const SparseMatrix& m,
                                   const SparseMatrix& a, const LoadFn& load, const Vector& p0,
                                   const TimeGrid& grid, const EigenPencilDecomp& decomp,
                                   const std::vector<int>& snapshot_steps = {}) {
  require(std::abs(decomp.tau - grid.tau) <= 1e-14 * grid.tau,
          "mfgmsfem_ei_run: pencil decomposition has a different time step");

  detail::StopWatch watch;
  SolveResult result;

  SparseMatrix m0 = decomp.mass;
  Vector p = project_initial(space, m, m0, p0);
  detail::maybe_snapshot(snapshot_steps, 0, p, result.snapshots);

  Vector r, rh;
  for (int step = 1; step <= grid.n_steps; ++step) {
    a.apply(p, r);
    scale(r, -1.0);
    if (load) axpy(1.0, load(p), r);
    rh = restrict_to_coarse(space, r);
    Vector delta = apply_phi1_pencil(decomp, rh);
    Vector update = prolongate(space, delta);
    axpy(grid.tau, update, p);
    detail::maybe_snapshot(snapshot_steps, step, p, result.snapshots);
  }
  result.final_state = std::move(p);
  result.wall_seconds = watch.seconds();
  return result;
}

/// Convenience overload that assembles the coarse matrices and decomposes
/// the pencil itself.
inline SolveResult mfgmsfem_ei_run(const MultiscaleSpace& space, const SparseMatrix& m,
                                   const SparseMatrix& a, const LoadFn& load, const Vector& p0,
                                   const TimeGrid& grid,
                                   const std::vector<int>& snapshot_steps = {}) {
  auto [m0, a0] = coarse_matrices(space, m, a);
  EigenPencilDecomp decomp = coarse_pencil_eig(m0, a0, grid.tau);
  return mfgmsfem_ei_run(space, m, a, load, p0, grid, decomp, snapshot_steps);
}

}  // namespace msexp
