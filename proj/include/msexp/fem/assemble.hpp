#pragma once

#include <array>
#include <utility>

#include "msexp/common.hpp"
#include "msexp/fem/mesh.hpp"
#include "msexp/fem/permeability.hpp"
#include "msexp/linalg/sparse.hpp"

namespace msexp {

namespace detail {

/// P1 gradients on a triangle: grad(lambda_i) = (b_i, c_i) / (2 area).
struct P1Geometry {
  double b[3];
  double c[3];
  double area;
};

inline P1Geometry p1_geometry(const FineMesh& mesh, int cell) {
  const auto& t = mesh.triangles[cell];
  const Point& p0 = mesh.vertices[t[0]];
  const Point& p1 = mesh.vertices[t[1]];
  const Point& p2 = mesh.vertices[t[2]];
  P1Geometry g;
  g.b[0] = p1.y - p2.y;
  g.b[1] = p2.y - p0.y;
  g.b[2] = p0.y - p1.y;
  g.c[0] = p2.x - p1.x;
  g.c[1] = p0.x - p2.x;
  g.c[2] = p1.x - p0.x;
  g.area = 0.5 * (g.c[2] * g.b[1] - g.c[1] * g.b[2]);
  return g;
}

template <typename EmitEntry>
inline void for_each_stiffness_entry(const FineMesh& mesh, const PermeabilityField& kappa,
                                     int cell, EmitEntry&& emit) {
  const P1Geometry g = p1_geometry(mesh, cell);
  const double s = kappa.cell_values[cell] / (4.0 * g.area);
  const auto& t = mesh.triangles[cell];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) emit(t[i], t[j], s * (g.b[i] * g.b[j] + g.c[i] * g.c[j]));
}

template <typename EmitEntry>
inline void for_each_mass_entry(const FineMesh& mesh, double weight, int cell, EmitEntry&& emit) {
  const double area = mesh.cell_area(cell);
  const double off = weight * area / 12.0;
  const auto& t = mesh.triangles[cell];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) emit(t[i], t[j], i == j ? 2.0 * off : off);
}

}  // namespace detail

/// kappa-weighted P1 stiffness matrix; exact integrals for cell-wise
/// constant kappa. Row sums vanish (constants are in the kernel) until
/// Dirichlet elimination.
inline SparseMatrix assemble_stiffness(const FineMesh& mesh, const PermeabilityField& kappa) {
  require(static_cast<int>(kappa.cell_values.size()) == mesh.n_cells(),
          "assemble_stiffness: kappa length mismatch");
  std::vector<Triplet> t;
  t.reserve(9 * static_cast<std::size_t>(mesh.n_cells()));
  for (int cell = 0; cell < mesh.n_cells(); ++cell)
    detail::for_each_stiffness_entry(mesh, kappa, cell,
                                     [&](int i, int j, double v) { t.push_back({i, j, v}); });
  return csr_from_triplets(t, mesh.n_vertices(), mesh.n_vertices());
}

/// Consistent (non-lumped) P1 mass matrix with cell-wise constant weight.
inline SparseMatrix assemble_mass(const FineMesh& mesh, const PermeabilityField& weight) {
  require(static_cast<int>(weight.cell_values.size()) == mesh.n_cells(),
          "assemble_mass: weight length mismatch");
  std::vector<Triplet> t;
  t.reserve(9 * static_cast<std::size_t>(mesh.n_cells()));
  for (int cell = 0; cell < mesh.n_cells(); ++cell)
    detail::for_each_mass_entry(mesh, weight.cell_values[cell], cell,
                                [&](int i, int j, double v) { t.push_back({i, j, v}); });
  return csr_from_triplets(t, mesh.n_vertices(), mesh.n_vertices());
}

/// Unit-weight mass matrix.
inline SparseMatrix assemble_mass(const FineMesh& mesh) {
  return assemble_mass(mesh, uniform_permeability(mesh));
}

/// Group-FEM load: f is evaluated at the nodes and interpolated linearly,
/// so b = M_unit * nodal_f.
inline Vector assemble_load(const FineMesh& mesh, const Vector& nodal_f) {
  require(static_cast<int>(nodal_f.size()) == mesh.n_vertices(),
          "assemble_load: nodal values must be full-length");
  return assemble_mass(mesh).apply(nodal_f);
}

// ---- subset assembly over a neighborhood's cells (natural boundary) ----

inline SparseMatrix assemble_stiffness_subset(const FineMesh& mesh, const PermeabilityField& kappa,
                                              const std::vector<int>& cells,
                                              const std::vector<int>& local_of_global,
                                              int n_local) {
  std::vector<Triplet> t;
  t.reserve(9 * cells.size());
  for (int cell : cells)
    detail::for_each_stiffness_entry(mesh, kappa, cell, [&](int i, int j, double v) {
      t.push_back({local_of_global[i], local_of_global[j], v});
    });
  return csr_from_triplets(t, n_local, n_local);
}

inline SparseMatrix assemble_mass_subset(const FineMesh& mesh, const PermeabilityField& weight,
                                         const std::vector<int>& cells,
                                         const std::vector<int>& local_of_global, int n_local) {
  std::vector<Triplet> t;
  t.reserve(9 * cells.size());
  for (int cell : cells)
    detail::for_each_mass_entry(mesh, weight.cell_values[cell], cell, [&](int i, int j, double v) {
      t.push_back({local_of_global[i], local_of_global[j], v});
    });
  return csr_from_triplets(t, n_local, n_local);
}

// ---- homogeneous Dirichlet elimination ----

inline Vector reduce_vector(const Vector& full, const FineMesh& mesh) {
  require(static_cast<int>(full.size()) == mesh.n_vertices(), "reduce_vector: not full-length");
  Vector r(mesh.n_interior());
  for (int k = 0; k < mesh.n_interior(); ++k) r[k] = full[mesh.interior_nodes[k]];
  return r;
}

inline Vector expand_vector(const Vector& reduced, const FineMesh& mesh) {
  require(static_cast<int>(reduced.size()) == mesh.n_interior(),
          "expand_vector: not interior-length");
  Vector full(mesh.n_vertices(), 0.0);
  for (int k = 0; k < mesh.n_interior(); ++k) full[mesh.interior_nodes[k]] = reduced[k];
  return full;
}

inline SparseMatrix reduce_matrix(const SparseMatrix& a, const FineMesh& mesh) {
  require(a.rows() == mesh.n_vertices() && a.cols() == mesh.n_vertices(),
          "reduce_matrix: matrix size mismatch");
  std::vector<Triplet> t;
  for (int k = 0; k < mesh.n_interior(); ++k) {
    const int i = mesh.interior_nodes[k];
    for (int p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p) {
      const int jj = mesh.interior_index[a.col_indices()[p]];
      if (jj >= 0) t.push_back({k, jj, a.values()[p]});
    }
  }
  return csr_from_triplets(t, mesh.n_interior(), mesh.n_interior());
}

/// Eliminates boundary rows/columns for p = value on the boundary. Only the
/// homogeneous case is supported; the reduced system is indexed by
/// mesh.interior_nodes.
inline std::pair<SparseMatrix, Vector> apply_dirichlet(const SparseMatrix& matrix,
                                                       const Vector& rhs, const FineMesh& mesh,
                                                       double value = 0.0) {
  require(value == 0.0, "apply_dirichlet: only homogeneous boundary values are supported");
  return {reduce_matrix(matrix, mesh), reduce_vector(rhs, mesh)};
}

}  // namespace msexp
