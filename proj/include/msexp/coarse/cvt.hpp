#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "msexp/common.hpp"
#include "msexp/fem/mesh.hpp"

namespace msexp {

/// Coarse point cloud. Radii are filled by compute_radii; the effective
/// (possibly repaired) radii live in the Neighborhoods built from it.
struct PointCloud {
  std::vector<Point> points;
  Vector radii;
  std::uint64_t seed = 0;
  double gamma = 0.0;

  int size() const { return static_cast<int>(points.size()); }
};

namespace detail {

enum class EdgeLock : unsigned char { none, horizontal, vertical, corner };

}  // namespace detail

/// Density-weighted discrete Lloyd iteration over fine-cell centroids.
/// Points start on a jittered ceil(sqrt(n))-square grid; when
/// include_boundary is set the grid touches the boundary lines, and points
/// born on a boundary edge slide only along that edge (corners stay put).
inline PointCloud generate_point_cloud(const Vector& density, const FineMesh& mesh, int n_points,
                                       std::uint64_t seed, int max_iters,
                                       bool include_boundary = true) {
  require(n_points >= 1, "generate_point_cloud: need at least one point");
  require(n_points <= mesh.n_cells(), "generate_point_cloud: more points than fine cells");
  require(static_cast<int>(density.size()) == mesh.n_vertices(),
          "generate_point_cloud: density must be nodal and full-length");

  PointCloud cloud;
  cloud.seed = seed;
  Rng rng(seed);

  // --- initialization grid ---
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_points))));
  std::vector<detail::EdgeLock> lock;
  if (include_boundary) {
    const double spacing = side > 1 ? 1.0 / (side - 1) : 1.0;
    const double amp = 0.2 * spacing;
    for (int j = 0; j < side && cloud.size() < n_points; ++j)
      for (int i = 0; i < side && cloud.size() < n_points; ++i) {
        const bool bx = (i == 0 || i == side - 1);
        const bool by = (j == 0 || j == side - 1);
        double x = side > 1 ? i * spacing : 0.5;
        double y = side > 1 ? j * spacing : 0.5;
        const double jx = rng.uniform(-amp, amp);
        const double jy = rng.uniform(-amp, amp);
        if (!bx) x += jx;
        if (!by) y += jy;
        cloud.points.push_back({x, y});
        lock.push_back(bx && by         ? detail::EdgeLock::corner
                       : by             ? detail::EdgeLock::horizontal
                       : bx             ? detail::EdgeLock::vertical
                                        : detail::EdgeLock::none);
      }
  } else {
    const double spacing = 1.0 / (side + 1);
    const double amp = 0.2 * spacing;
    for (int j = 1; j <= side && cloud.size() < n_points; ++j)
      for (int i = 1; i <= side && cloud.size() < n_points; ++i) {
        cloud.points.push_back({i * spacing + rng.uniform(-amp, amp),
                                j * spacing + rng.uniform(-amp, amp)});
        lock.push_back(detail::EdgeLock::none);
      }
  }

  // --- per-cell weights: density at the centroid times cell area ---
  const int n_cells = mesh.n_cells();
  std::vector<Point> centroid(n_cells);
  Vector weight(n_cells);
  for (int c = 0; c < n_cells; ++c) {
    centroid[c] = mesh.cell_centroid(c);
    const auto& t = mesh.triangles[c];
    const double rho = (density[t[0]] + density[t[1]] + density[t[2]]) / 3.0;
    weight[c] = rho * mesh.cell_area(c);
  }

  // --- Lloyd iterations ---
  const int n = cloud.size();
  for (int iter = 0; iter < max_iters; ++iter) {
    Vector wsum(n, 0.0), wx(n, 0.0), wy(n, 0.0);
    for (int c = 0; c < n_cells; ++c) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int p = 0; p < n; ++p) {
        const double dx = centroid[c].x - cloud.points[p].x;
        const double dy = centroid[c].y - cloud.points[p].y;
        const double d = dx * dx + dy * dy;
        if (d < best_d) {
          best_d = d;
          best = p;
        }
      }
      wsum[best] += weight[c];
      wx[best] += weight[c] * centroid[c].x;
      wy[best] += weight[c] * centroid[c].y;
    }

    double moved = 0.0;
    for (int p = 0; p < n; ++p) {
      if (wsum[p] == 0.0) continue;  // starved point keeps its position
      Point target{wx[p] / wsum[p], wy[p] / wsum[p]};
      switch (lock[p]) {
        case detail::EdgeLock::corner:
          target = cloud.points[p];
          break;
        case detail::EdgeLock::horizontal:
          target.y = cloud.points[p].y;
          break;
        case detail::EdgeLock::vertical:
          target.x = cloud.points[p].x;
          break;
        case detail::EdgeLock::none:
          break;
      }
      moved = std::max(moved, distance(target, cloud.points[p]));
      cloud.points[p] = target;
    }
    if (moved < 1e-6) break;
  }
  return cloud;
}

/// r_i = gamma times the nearest-other-point distance. gamma > 1 is
/// required for the neighborhoods to have a chance of covering the domain.
inline Vector compute_radii(const PointCloud& cloud, double gamma) {
  require(gamma > 1.0, "compute_radii: gamma must exceed 1 for complete coverage");
  require(cloud.size() >= 2, "compute_radii: need at least two points");
  const int n = cloud.size();
  Vector radii(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
      if (j != i) nearest = std::min(nearest, distance(cloud.points[i], cloud.points[j]));
    radii[i] = gamma * nearest;
  }
  return radii;
}

}  // namespace msexp
