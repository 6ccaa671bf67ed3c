#pragma once

#include <algorithm>

#include "msexp/common.hpp"
#include "msexp/fem/assemble.hpp"
#include "msexp/linalg/skyline.hpp"

namespace msexp {

constexpr double kDensityFloor = 1e-6;

/// Point-placement density: solves the screened smoothing problem
/// (M + beta A) rho = M p0 with homogeneous Dirichlet data, then clamps to
/// the positive floor and normalizes to unit maximum. beta = 0 reproduces
/// p0 at the interior nodes.
inline Vector compute_density(const FineMesh& mesh, const PermeabilityField& kappa,
                              const Vector& p0, double beta) {
  require(beta >= 0.0, "compute_density: beta must be nonnegative");
  require(static_cast<int>(p0.size()) == mesh.n_vertices(),
          "compute_density: p0 must be full-length");

  const SparseMatrix mass = assemble_mass(mesh);
  Vector rhs_full = mass.apply(p0);

  std::vector<Triplet> t;
  const SparseMatrix stiff = assemble_stiffness(mesh, kappa);
  for (int i = 0; i < mass.rows(); ++i) {
    for (int k = mass.row_offsets()[i]; k < mass.row_offsets()[i + 1]; ++k)
      t.push_back({i, mass.col_indices()[k], mass.values()[k]});
    if (beta > 0.0)
      for (int k = stiff.row_offsets()[i]; k < stiff.row_offsets()[i + 1]; ++k)
        t.push_back({i, stiff.col_indices()[k], beta * stiff.values()[k]});
  }
  const SparseMatrix system = csr_from_triplets(t, mass.rows(), mass.cols());

  auto [reduced, rhs] = apply_dirichlet(system, rhs_full, mesh);
  Vector rho_full(mesh.n_vertices(), 0.0);
  if (mesh.n_interior() > 0) {
    SkylineCholesky chol(reduced);
    rho_full = expand_vector(chol.solve(rhs), mesh);
  }

  for (double& v : rho_full) v = std::max(v, kDensityFloor);
  const double peak = *std::max_element(rho_full.begin(), rho_full.end());
  for (double& v : rho_full) v /= peak;
  return rho_full;
}

}  // namespace msexp
