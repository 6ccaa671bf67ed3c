#pragma once

#include <utility>

#include "msexp/basis/local_basis.hpp"
#include "msexp/basis/shape.hpp"
#include "msexp/common.hpp"
#include "msexp/coarse/neighborhoods.hpp"
#include "msexp/linalg/sparse.hpp"

namespace msexp {

/// Projection into the multiscale space. Row (i, k) of r0 carries the nodal
/// values of W_i * psi_k^{S_i} restricted to the interior DOFs; rows whose
/// interior trace vanishes are dropped (counted in dropped_rows).
struct MultiscaleSpace {
  SparseMatrix r0;                             // N_c x n_interior
  std::vector<std::pair<int, int>> row_index;  // coarse row -> (neighborhood, eigenindex)
  std::vector<std::vector<int>> row_neighbors; // coarse rows with overlapping support
  int n_interior = 0;
  int dropped_rows = 0;

  int n_coarse() const { return r0.rows(); }
};

/// Stacks the products of shape functions and local eigenvectors into the
/// projection matrix. Only the first n_b eigenpairs of each basis are used,
/// so bases computed once at the largest requested count can be sliced.
inline MultiscaleSpace build_multiscale_space(const std::vector<LocalEigenBasis>& bases,
                                              const ShapeFunctions& shapes,
                                              const Neighborhoods& neighborhoods,
                                              const FineMesh& mesh, int n_b) {
  const int n = neighborhoods.size();
  require(static_cast<int>(bases.size()) == n && static_cast<int>(shapes.values.size()) == n,
          "build_multiscale_space: bases/shapes/neighborhoods mismatch");
  for (const auto& b : bases)
    require(b.retained() >= n_b, "build_multiscale_space: basis holds fewer than n_b eigenpairs");

  MultiscaleSpace space;
  space.n_interior = mesh.n_interior();

  std::vector<Triplet> triplets;
  int row = 0;
  for (int i = 0; i < n; ++i) {
    const auto& nodes = neighborhoods.items[i].nodes;
    for (int k = 0; k < n_b; ++k) {
      bool nonzero = false;
      for (std::size_t a = 0; a < nodes.size(); ++a) {
        const int col = mesh.interior_index[nodes[a]];
        if (col < 0) continue;
        const double v = shapes.values[i][a] * bases[i].eigenvectors(static_cast<int>(a), k);
        if (v != 0.0) {
          triplets.push_back({row, col, v});
          nonzero = true;
        }
      }
      if (nonzero) {
        space.row_index.emplace_back(i, k);
        ++row;
      } else {
        ++space.dropped_rows;  // interior trace vanished, row skipped
      }
    }
  }
  space.r0 = csr_from_triplets(triplets, row, mesh.n_interior());

  // Row adjacency from neighborhood node overlap (shared interior nodes).
  std::vector<std::vector<int>> node_owners(mesh.n_vertices());
  for (int i = 0; i < n; ++i)
    for (int v : neighborhoods.items[i].nodes)
      if (mesh.interior_index[v] >= 0) node_owners[v].push_back(i);
  std::vector<std::vector<char>> overlap(n, std::vector<char>(n, 0));
  for (const auto& owners : node_owners)
    for (std::size_t a = 0; a < owners.size(); ++a)
      for (std::size_t b = 0; b < owners.size(); ++b) overlap[owners[a]][owners[b]] = 1;

  std::vector<std::vector<int>> rows_of(n);
  for (int r = 0; r < space.n_coarse(); ++r) rows_of[space.row_index[r].first].push_back(r);
  space.row_neighbors.resize(space.n_coarse());
  for (int r = 0; r < space.n_coarse(); ++r) {
    const int i = space.row_index[r].first;
    for (int j = 0; j < n; ++j)
      if (overlap[i][j])
        for (int rj : rows_of[j]) space.row_neighbors[r].push_back(rj);
  }
  return space;
}

namespace detail {

/// Sparse triple product R0 S R0^T restricted to overlapping row pairs.
/// Each unordered pair is computed once and mirrored, so the result is
/// exactly symmetric.
inline SparseMatrix triple_product(const MultiscaleSpace& space, const SparseMatrix& s) {
  const int nc = space.n_coarse();
  const SparseMatrix& r0 = space.r0;
  std::vector<Triplet> out;
  Vector y(space.n_interior);

  for (int i = 0; i < nc; ++i) {
    // y = S r_i^T (dense scatter)
    y.assign(space.n_interior, 0.0);
    for (int p = r0.row_offsets()[i]; p < r0.row_offsets()[i + 1]; ++p) {
      const int col = r0.col_indices()[p];
      const double w = r0.values()[p];
      for (int q = s.row_offsets()[col]; q < s.row_offsets()[col + 1]; ++q)
        y[s.col_indices()[q]] += s.values()[q] * w;
    }
    for (int j : space.row_neighbors[i]) {
      if (j > i) continue;
      double v = 0.0;
      for (int p = r0.row_offsets()[j]; p < r0.row_offsets()[j + 1]; ++p)
        v += r0.values()[p] * y[r0.col_indices()[p]];
      if (v != 0.0) {
        out.push_back({i, j, v});
        if (j != i) out.push_back({j, i, v});
      }
    }
  }
  return csr_from_triplets(out, nc, nc);
}

}  // namespace detail

/// M0 = R0 M R0^T and A0 = R0 A R0^T from the reduced fine-scale matrices.
inline std::pair<SparseMatrix, SparseMatrix> coarse_matrices(const MultiscaleSpace& space,
                                                             const SparseMatrix& m,
                                                             const SparseMatrix& a) {
  require(m.rows() == space.n_interior && a.rows() == space.n_interior,
          "coarse_matrices: fine matrices must be reduced to interior DOFs");
  return {detail::triple_product(space, m), detail::triple_product(space, a)};
}

/// Fine-scale representation R0^T c of a coarse vector.
inline Vector prolongate(const MultiscaleSpace& space, const Vector& coarse) {
  return space.r0.apply_transpose(coarse);
}

/// Coarse representation R0 v of a reduced fine vector.
inline Vector restrict_to_coarse(const MultiscaleSpace& space, const Vector& fine_reduced) {
  return space.r0.apply(fine_reduced);
}

}  // namespace msexp
