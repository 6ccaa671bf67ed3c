#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>
#include <map>
#include <utility>

#include "msexp/common.hpp"
#include "msexp/coarse/cvt.hpp"
#include "msexp/fem/mesh.hpp"
#include "msexp/linalg/dense.hpp"

namespace msexp {

struct Neighborhood {
  std::vector<int> cells;  // ascending fine-cell ids, edge-connected
  std::vector<int> nodes;  // ascending global vertex ids of those cells
};

/// Overlapping cover of the fine mesh by coarse neighborhoods. Radii here
/// are the effective ones: coverage repair may have scaled them up from the
/// point cloud's initial values.
struct Neighborhoods {
  std::vector<Neighborhood> items;
  Vector radii;
  int repair_rounds = 0;
  int n_cells = 0;
  int n_vertices = 0;

  int size() const { return static_cast<int>(items.size()); }
};

struct CoverReport {
  bool covered = false;
  int c_ov = 0;
  double delta = 0.0;
  double lambda_max_overlap = 0.0;
};

namespace detail {

/// Cell adjacency through shared edges.
inline std::vector<std::array<int, 3>> cell_edge_neighbors(const FineMesh& mesh) {
  std::map<std::pair<int, int>, std::pair<int, int>> edge_cells;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& t = mesh.triangles[c];
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      auto [it, fresh] = edge_cells.try_emplace({a, b}, std::pair<int, int>{c, -1});
      if (!fresh) it->second.second = c;
    }
  }
  std::vector<std::array<int, 3>> nb(mesh.n_cells(), {-1, -1, -1});
  std::vector<int> filled(mesh.n_cells(), 0);
  for (const auto& [edge, cells] : edge_cells)
    if (cells.second >= 0) {
      nb[cells.first][filled[cells.first]++] = cells.second;
      nb[cells.second][filled[cells.second]++] = cells.first;
    }
  return nb;
}

}  // namespace detail

/// Builds the neighborhoods by the max-vertex criterion: a cell belongs to
/// S_i when its farthest vertex lies within the radius. Each S_i is trimmed
/// to the edge-connected component containing the cell nearest its point;
/// if any fine cell ends up uncovered, all radii are scaled by 1.1 and the
/// memberships recomputed (at most 20 rounds).
inline Neighborhoods build_neighborhoods(const FineMesh& mesh, const PointCloud& cloud) {
  require(cloud.size() >= 1, "build_neighborhoods: empty point cloud");
  require(cloud.radii.size() == cloud.points.size(),
          "build_neighborhoods: radii not computed");

  const int n_pts = cloud.size();
  const int n_cells = mesh.n_cells();
  const auto adjacency = detail::cell_edge_neighbors(mesh);

  std::vector<Point> centroids(n_cells);
  for (int c = 0; c < n_cells; ++c) centroids[c] = mesh.cell_centroid(c);

  Neighborhoods result;
  result.radii = cloud.radii;
  result.n_cells = n_cells;
  result.n_vertices = mesh.n_vertices();

  constexpr int kMaxRepairRounds = 20;
  for (int round = 0;; ++round) {
    result.items.assign(n_pts, {});
    std::vector<int> cover_count(n_cells, 0);

    for (int i = 0; i < n_pts; ++i) {
      const Point& xi = cloud.points[i];
      const double ri = result.radii[i];
      std::vector<char> member(n_cells, 0);
      std::vector<int> member_cells;
      int anchor = -1;
      double anchor_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < n_cells; ++c) {
        const auto& t = mesh.triangles[c];
        double far = 0.0;
        for (int v : t) far = std::max(far, distance(mesh.vertices[v], xi));
        if (far <= ri) {
          member[c] = 1;
          member_cells.push_back(c);
        }
        const double cd = distance(centroids[c], xi);
        if (cd < anchor_d) {
          anchor_d = cd;
          anchor = c;
        }
      }
      if (member_cells.empty()) continue;  // starved; repair will grow the radii
      if (!member[anchor]) {
        // radius too small to reach the globally nearest cell: anchor at
        // the nearest member instead so S_i stays nonempty
        double best = std::numeric_limits<double>::infinity();
        for (int c : member_cells) {
          const double cd = distance(centroids[c], xi);
          if (cd < best) {
            best = cd;
            anchor = c;
          }
        }
      }

      // keep the connected component through the anchor cell
      std::vector<char> in_component(n_cells, 0);
      std::vector<int> stack{anchor};
      in_component[anchor] = 1;
      while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        for (int nb : adjacency[c])
          if (nb >= 0 && member[nb] && !in_component[nb]) {
            in_component[nb] = 1;
            stack.push_back(nb);
          }
      }
      for (int c : member_cells)
        if (in_component[c]) {
          result.items[i].cells.push_back(c);
          ++cover_count[c];
        }
    }

    int uncovered = 0;
    for (int c = 0; c < n_cells; ++c)
      if (cover_count[c] == 0) ++uncovered;
    int starved = 0;
    for (const auto& nbhd : result.items)
      if (nbhd.cells.empty()) ++starved;
    if (uncovered == 0 && starved == 0) {
      result.repair_rounds = round;
      break;
    }
    if (round == kMaxRepairRounds)
      throw NumericalError("build_neighborhoods: coverage repair exhausted after " +
                           std::to_string(kMaxRepairRounds) + " rounds, " +
                           std::to_string(uncovered) + " fine cells uncovered, " +
                           std::to_string(starved) + " empty neighborhoods");
    for (double& r : result.radii) r *= 1.1;
  }

  for (auto& nbhd : result.items) {
    std::vector<int> nodes;
    nodes.reserve(3 * nbhd.cells.size());
    for (int c : nbhd.cells)
      for (int v : mesh.triangles[c]) nodes.push_back(v);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    nbhd.nodes = std::move(nodes);
  }
  return result;
}

/// Largest eigenvalue of the 0/1 neighborhood-intersection matrix by power
/// iteration. The Perron vector of a nonnegative symmetric matrix is
/// reachable from the positive start vector, so the estimate converges to
/// lambda_max from below; it must not exceed C_ov.
inline double overlap_spectral_bound(const Neighborhoods& neighborhoods) {
  const int n = neighborhoods.size();
  require(n >= 1, "overlap_spectral_bound: no neighborhoods");

  std::vector<std::vector<int>> cover(neighborhoods.n_cells);
  for (int i = 0; i < n; ++i)
    for (int c : neighborhoods.items[i].cells) cover[c].push_back(i);

  DenseMatrix eps(n, n);
  for (int i = 0; i < n; ++i) eps(i, i) = 1.0;
  int c_ov = 0;
  for (const auto& list : cover) {
    c_ov = std::max(c_ov, static_cast<int>(list.size()));
    for (std::size_t a = 0; a < list.size(); ++a)
      for (std::size_t b = a + 1; b < list.size(); ++b)
        eps(list[a], list[b]) = eps(list[b], list[a]) = 1.0;
  }

  Vector x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double lambda = 0.0;
  bool converged = false;
  for (int it = 0; it < 1000; ++it) {
    Vector y = eps.apply(x);
    const double ny = norm2(y);
    if (ny == 0.0) break;
    scale(y, 1.0 / ny);
    Vector ey = eps.apply(y);
    const double next = dot(y, ey);
    if (std::abs(next - lambda) <= 1e-12 * std::max(1.0, std::abs(next))) {
      lambda = next;
      converged = true;
      break;
    }
    lambda = next;
    x = std::move(y);
  }
  if (!converged)
    std::fprintf(stderr, "overlap_spectral_bound: power iteration stagnated at %.12g\n", lambda);
  return lambda;
}

/// Cover diagnostics: C_ov, the overlap width delta (centroid-grade), and
/// the spectral bound.
inline CoverReport coverage_diagnostics(const Neighborhoods& neighborhoods, const FineMesh& mesh) {
  const int n = neighborhoods.size();
  CoverReport report;

  std::vector<int> cover_count(mesh.n_cells(), 0);
  for (const auto& nbhd : neighborhoods.items)
    for (int c : nbhd.cells) ++cover_count[c];
  report.c_ov = 0;
  report.covered = true;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    report.c_ov = std::max(report.c_ov, cover_count[c]);
    if (cover_count[c] == 0) report.covered = false;
  }

  // delta_i: distance from the exclusively-owned part of S_i to the
  // boundary of S_i, measured from cell centroids to boundary edges.
  auto point_segment_distance = [](const Point& p, const Point& a, const Point& b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
  };

  double delta = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const auto& nbhd = neighborhoods.items[i];
    std::vector<int> exclusive;
    for (int c : nbhd.cells)
      if (cover_count[c] == 1) exclusive.push_back(c);
    if (exclusive.empty()) {
      delta = 0.0;
      continue;
    }
    // boundary edges of the union appear in exactly one member cell
    std::map<std::pair<int, int>, int> edge_count;
    for (int c : nbhd.cells) {
      const auto& t = mesh.triangles[c];
      for (int e = 0; e < 3; ++e) {
        int a = t[e], b = t[(e + 1) % 3];
        if (a > b) std::swap(a, b);
        ++edge_count[{a, b}];
      }
    }
    double delta_i = std::numeric_limits<double>::infinity();
    for (int c : exclusive) {
      const Point centroid = mesh.cell_centroid(c);
      for (const auto& [edge, count] : edge_count)
        if (count == 1)
          delta_i = std::min(delta_i, point_segment_distance(centroid, mesh.vertices[edge.first],
                                                             mesh.vertices[edge.second]));
    }
    delta = std::min(delta, delta_i);
  }
  report.delta = std::isfinite(delta) ? delta : 0.0;
  report.lambda_max_overlap = overlap_spectral_bound(neighborhoods);
  return report;
}

}  // namespace msexp
