#pragma once

#include "msexp/common.hpp"
#include "msexp/coarse/cvt.hpp"
#include "msexp/coarse/neighborhoods.hpp"

namespace msexp {

/// Cubic spline kernel on the normalized distance r = ||x - x_i|| / r_i:
/// phi(0) = 4/3, phi(1/2) = 1/3, phi(r >= 1) = 0.
inline double cubic_spline_kernel(double r) {
  if (r < 0.5) return 2.0 * (2.0 / 3.0 + 4.0 * (r - 1.0) * r * r);
  if (r < 1.0) {
    const double s = 1.0 - r;
    return (8.0 / 3.0) * s * s * s;
  }
  return 0.0;
}

/// Shepard-normalized shape functions evaluated at the fine nodes of each
/// neighborhood. values[i] is aligned with neighborhoods.items[i].nodes;
/// the kernel is zeroed outside the neighborhood's node set, so the
/// normalization runs over covering neighborhoods only.
struct ShapeFunctions {
  std::vector<Vector> values;
};

inline ShapeFunctions shape_functions(const PointCloud& cloud, const FineMesh& mesh,
                                      const Neighborhoods& neighborhoods) {
  require(cloud.size() == neighborhoods.size(), "shape_functions: cloud/neighborhood mismatch");

  const int n = neighborhoods.size();
  ShapeFunctions shapes;
  shapes.values.resize(n);
  Vector denom(mesh.n_vertices(), 0.0);
  std::vector<char> touched(mesh.n_vertices(), 0);

  for (int i = 0; i < n; ++i) {
    const auto& nodes = neighborhoods.items[i].nodes;
    Vector& vals = shapes.values[i];
    vals.resize(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double r = distance(mesh.vertices[nodes[k]], cloud.points[i]) / neighborhoods.radii[i];
      vals[k] = cubic_spline_kernel(r);
      denom[nodes[k]] += vals[k];
      touched[nodes[k]] = 1;
    }
  }

  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (touched[v] && denom[v] <= 0.0)
      throw NumericalError("shape_functions: node " + std::to_string(v) +
                           " has zero kernel sum despite coverage");

  for (int i = 0; i < n; ++i) {
    const auto& nodes = neighborhoods.items[i].nodes;
    for (std::size_t k = 0; k < nodes.size(); ++k) shapes.values[i][k] /= denom[nodes[k]];
  }
  return shapes;
}

}  // namespace msexp
