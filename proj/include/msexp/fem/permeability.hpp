#pragma once

#include <algorithm>

#include "msexp/common.hpp"
#include "msexp/fem/mesh.hpp"

namespace msexp {

/// Cell-wise constant permeability over a fine mesh.
struct PermeabilityField {
  Vector cell_values;
  double kappa_min = 0.0;
  double kappa_max = 0.0;

  double contrast() const { return kappa_min > 0.0 ? kappa_max / kappa_min : 0.0; }
};

inline PermeabilityField make_permeability(Vector cell_values) {
  require(!cell_values.empty(), "make_permeability: empty field");
  PermeabilityField f;
  f.kappa_min = *std::min_element(cell_values.begin(), cell_values.end());
  f.kappa_max = *std::max_element(cell_values.begin(), cell_values.end());
  require(f.kappa_min > 0.0, "make_permeability: permeability must be positive");
  f.cell_values = std::move(cell_values);
  return f;
}

inline PermeabilityField uniform_permeability(const FineMesh& mesh, double value = 1.0) {
  return make_permeability(Vector(mesh.n_cells(), value));
}

}  // namespace msexp
