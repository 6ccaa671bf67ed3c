#pragma once

#include <array>

#include "msexp/common.hpp"

namespace msexp {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Structured triangulation of the unit square: nx-by-ny squares, each split
/// along the lower-left to upper-right diagonal into two triangles with
/// counterclockwise orientation. Vertex (i, j) has index j*(nx+1)+i.
struct FineMesh {
  int nx = 0;
  int ny = 0;
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<bool> on_boundary;       // per vertex
  std::vector<int> interior_nodes;     // ascending vertex ids
  std::vector<int> interior_index;     // vertex id -> position in interior_nodes, -1 on boundary

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(triangles.size()); }
  int n_interior() const { return static_cast<int>(interior_nodes.size()); }

  int vertex_id(int i, int j) const { return j * (nx + 1) + i; }

  Point cell_centroid(int cell) const {
    const auto& t = triangles[cell];
    return {(vertices[t[0]].x + vertices[t[1]].x + vertices[t[2]].x) / 3.0,
            (vertices[t[0]].y + vertices[t[1]].y + vertices[t[2]].y) / 3.0};
  }

  double cell_area(int cell) const {
    const auto& t = triangles[cell];
    const Point& a = vertices[t[0]];
    const Point& b = vertices[t[1]];
    const Point& c = vertices[t[2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  }
};

inline FineMesh build_structured_mesh(int nx, int ny) {
  require(nx >= 1 && ny >= 1, "build_structured_mesh: cell counts must be >= 1");
  FineMesh mesh;
  mesh.nx = nx;
  mesh.ny = ny;

  mesh.vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.push_back({static_cast<double>(i) / nx, static_cast<double>(j) / ny});

  mesh.triangles.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int v00 = mesh.vertex_id(i, j);
      const int v10 = mesh.vertex_id(i + 1, j);
      const int v01 = mesh.vertex_id(i, j + 1);
      const int v11 = mesh.vertex_id(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }

  mesh.on_boundary.assign(mesh.vertices.size(), false);
  mesh.interior_index.assign(mesh.vertices.size(), -1);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      if (i == 0 || i == nx || j == 0 || j == ny) mesh.on_boundary[mesh.vertex_id(i, j)] = true;
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (!mesh.on_boundary[v]) {
      mesh.interior_index[v] = static_cast<int>(mesh.interior_nodes.size());
      mesh.interior_nodes.push_back(v);
    }
  return mesh;
}

}  // namespace msexp
