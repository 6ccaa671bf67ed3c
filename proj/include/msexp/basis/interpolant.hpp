#pragma once

#include "msexp/basis/local_basis.hpp"
#include "msexp/basis/shape.hpp"
#include "msexp/common.hpp"
#include "msexp/fem/assemble.hpp"

namespace msexp {

struct NeighborhoodTruncation {
  int neighborhood = -1;
  double lhs = 0.0;          // weighted L2 distance of u to its local projection
  double rhs = 0.0;          // local weighted H1 energy / lambda_{n_b+1}
  double lambda_next = 0.0;  // lambda_{n_b+1}
  bool vacuous = false;      // lambda_next below resolution, bound carries no information
  bool holds = false;
};

struct InterpolantReport {
  std::vector<NeighborhoodTruncation> items;
  Vector interpolant;  // I_0 u, full-length nodal field
  bool all_hold = true;
};

/// Coarse interpolation I_0 u = sum_i W_i I^{S_i} u, where I^{S_i} projects
/// onto the first n_b local eigenvectors in the kappa-weighted inner
/// product, plus the per-neighborhood truncation inequality
///   int_{S_i} kappa |u - I^{S_i} u|^2 <= (1/lambda_{n_b+1}) int_{S_i} kappa |grad u|^2.
/// Each basis must carry at least n_b + 1 eigenpairs.
inline InterpolantReport coarse_interpolant_report(const std::vector<LocalEigenBasis>& bases,
                                                   const ShapeFunctions& shapes,
                                                   const Neighborhoods& neighborhoods,
                                                   const Vector& u, const PermeabilityField& kappa,
                                                   const FineMesh& mesh, int n_b) {
  require(static_cast<int>(u.size()) == mesh.n_vertices(),
          "coarse_interpolant_report: u must be full-length");
  const int n = neighborhoods.size();
  require(static_cast<int>(bases.size()) == n, "coarse_interpolant_report: bases mismatch");

  InterpolantReport report;
  report.interpolant.assign(mesh.n_vertices(), 0.0);
  std::vector<int> local_of_global(mesh.n_vertices(), -1);

  for (int i = 0; i < n; ++i) {
    const auto& nbhd = neighborhoods.items[i];
    const int n_local = static_cast<int>(nbhd.nodes.size());
    require(bases[i].retained() >= n_b + 1,
            "coarse_interpolant_report: need n_b + 1 eigenpairs per neighborhood");

    for (int k = 0; k < n_local; ++k) local_of_global[nbhd.nodes[k]] = k;
    const SparseMatrix m_loc =
        assemble_mass_subset(mesh, kappa, nbhd.cells, local_of_global, n_local);
    const SparseMatrix a_loc =
        assemble_stiffness_subset(mesh, kappa, nbhd.cells, local_of_global, n_local);
    for (int k = 0; k < n_local; ++k) local_of_global[nbhd.nodes[k]] = -1;

    Vector u_loc(n_local);
    for (int k = 0; k < n_local; ++k) u_loc[k] = u[nbhd.nodes[k]];

    Vector mu = m_loc.apply(u_loc);
    Vector proj(n_local, 0.0);
    for (int k = 0; k < n_b; ++k) {
      double c = 0.0;
      for (int a = 0; a < n_local; ++a) c += bases[i].eigenvectors(a, k) * mu[a];
      for (int a = 0; a < n_local; ++a) proj[a] += c * bases[i].eigenvectors(a, k);
    }

    Vector diff(u_loc);
    axpy(-1.0, proj, diff);
    Vector mdiff = m_loc.apply(diff);
    Vector au = a_loc.apply(u_loc);

    NeighborhoodTruncation item;
    item.neighborhood = i;
    item.lhs = dot(diff, mdiff);
    item.lambda_next = bases[i].eigenvalues[n_b];
    item.vacuous = item.lambda_next <= 1e-12;
    item.rhs = item.vacuous ? 0.0 : dot(u_loc, au) / item.lambda_next;
    item.holds = item.vacuous || item.lhs <= item.rhs + 1e-9;
    report.all_hold = report.all_hold && item.holds;
    report.items.push_back(item);

    for (int a = 0; a < n_local; ++a)
      report.interpolant[nbhd.nodes[a]] += shapes.values[i][a] * proj[a];
  }
  return report;
}

}  // namespace msexp
