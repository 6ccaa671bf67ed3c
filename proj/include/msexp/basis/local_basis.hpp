#pragma once

#include "msexp/common.hpp"
#include "msexp/coarse/neighborhoods.hpp"
#include "msexp/fem/assemble.hpp"
#include "msexp/linalg/sparse_eig.hpp"

namespace msexp {

/// Lowest eigenpairs of the kappa-weighted local spectral problem on one
/// neighborhood, with natural boundary conditions. Eigenvector k (a column)
/// is stored over the neighborhood's node list and normalized so that
/// the kappa-weighted L2 norm over S_i is one.
struct LocalEigenBasis {
  int neighborhood = -1;
  Vector eigenvalues;        // ascending
  DenseMatrix eigenvectors;  // n_local x n_retained
  int retained() const { return static_cast<int>(eigenvalues.size()); }
};

/// Assembles the local kappa-weighted stiffness and mass over the
/// neighborhood's cells (all local nodes free) and solves the generalized
/// pencil for the first n_b eigenpairs.
inline LocalEigenBasis local_spectral_basis(const Neighborhood& nbhd, int neighborhood_id,
                                            const FineMesh& mesh, const PermeabilityField& kappa,
                                            int n_b) {
  const int n_local = static_cast<int>(nbhd.nodes.size());
  require(n_local > 0, "local_spectral_basis: empty neighborhood");
  require(n_b >= 1 && n_b <= n_local,
          "local_spectral_basis: retained count exceeds local DOF count");

  std::vector<int> local_of_global(mesh.n_vertices(), -1);
  for (int k = 0; k < n_local; ++k) local_of_global[nbhd.nodes[k]] = k;

  const SparseMatrix a_loc =
      assemble_stiffness_subset(mesh, kappa, nbhd.cells, local_of_global, n_local);
  const SparseMatrix m_loc =
      assemble_mass_subset(mesh, kappa, nbhd.cells, local_of_global, n_local);

  SymEigResult eig = lowest_eigenpairs(a_loc, m_loc, n_b);

  // Tighten the mass-orthonormality with one modified Gram-Schmidt pass.
  {
    std::vector<Vector> q(n_b, Vector(n_local));
    for (int j = 0; j < n_b; ++j)
      for (int i = 0; i < n_local; ++i) q[j][i] = eig.eigenvectors(i, j);
    Vector mq;
    for (int j = 0; j < n_b; ++j) {
      for (int k = 0; k < j; ++k) {
        m_loc.apply(q[k], mq);
        axpy(-dot(mq, q[j]), q[k], q[j]);
      }
      m_loc.apply(q[j], mq);
      const double nrm = std::sqrt(dot(mq, q[j]));
      if (!(nrm > 0.0))
        throw NumericalError("local_spectral_basis: eigenvector collapsed in neighborhood " +
                             std::to_string(neighborhood_id));
      scale(q[j], 1.0 / nrm);
      for (int i = 0; i < n_local; ++i) eig.eigenvectors(i, j) = q[j][i];
    }
  }
  detail::fix_column_signs(eig.eigenvectors);

  LocalEigenBasis basis;
  basis.neighborhood = neighborhood_id;
  basis.eigenvalues = std::move(eig.eigenvalues);
  basis.eigenvectors = std::move(eig.eigenvectors);
  return basis;
}

}  // namespace msexp
