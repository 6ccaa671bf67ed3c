#pragma once

#include <utility>

#include "msexp/common.hpp"
#include "msexp/fem/assemble.hpp"

namespace msexp {

struct WeightedNorms {
  double l2 = 0.0;
  double h1 = 0.0;
};

/// Discrete weighted norms from prebuilt kappa-weighted mass and stiffness:
/// l2 = sqrt(e^T M_k e), h1 = sqrt(e^T A e).
inline WeightedNorms weighted_norms(const Vector& e, const SparseMatrix& mass_kappa,
                                    const SparseMatrix& stiffness) {
  Vector me = mass_kappa.apply(e);
  Vector ae = stiffness.apply(e);
  return {std::sqrt(std::max(0.0, dot(e, me))), std::sqrt(std::max(0.0, dot(e, ae)))};
}

/// Convenience overload assembling the weighted matrices on the fly.
/// e must be full-length (boundary entries included).
inline WeightedNorms weighted_norms(const Vector& e, const PermeabilityField& kappa,
                                    const FineMesh& mesh) {
  require(static_cast<int>(e.size()) == mesh.n_vertices(), "weighted_norms: not full-length");
  return weighted_norms(e, assemble_mass(mesh, kappa), assemble_stiffness(mesh, kappa));
}

}  // namespace msexp
