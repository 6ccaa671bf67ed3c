#include <catch_amalgamated.hpp>

#include <cmath>

#include "msexp/coarse/neighborhoods.hpp"

using namespace msexp;

namespace {

PointCloud cloud_with(std::vector<Point> pts, Vector radii) {
  PointCloud c;
  c.points = std::move(pts);
  c.radii = std::move(radii);
  return c;
}

}  // namespace

TEST_CASE("a dominating radius swallows the whole mesh") {
  FineMesh mesh = build_structured_mesh(4, 4);
  PointCloud cloud = cloud_with({{0.5, 0.5}}, {1.0});
  Neighborhoods nbhds = build_neighborhoods(mesh, cloud);
  REQUIRE(nbhds.size() == 1);
  CHECK(static_cast<int>(nbhds.items[0].cells.size()) == mesh.n_cells());
  CHECK(static_cast<int>(nbhds.items[0].nodes.size()) == mesh.n_vertices());
  CHECK(nbhds.repair_rounds == 0);
}

TEST_CASE("max-vertex criterion on a 2x2 mesh from the corner") {
  FineMesh mesh = build_structured_mesh(2, 2);
  // one point at the origin with r = 0.6, a second far point covering the rest
  PointCloud cloud = cloud_with({{0.0, 0.0}, {1.0, 1.0}}, {0.6, 2.0});
  Neighborhoods nbhds = build_neighborhoods(mesh, cloud);

  // enumerate the 8 cells by hand: cell belongs iff its farthest vertex is
  // within 0.6 of the origin. Only the two triangles of the lower-left
  // square qualify (farthest vertex (0.5, 0.5), distance ~0.707 > 0.6 for
  // the diagonal triangle... both triangles touch (0.5,0.5), so none pass
  // with 0.6 < 0.707; with the first triangle's farthest vertex (0.5,0.5)
  // the membership is empty and repair kicks in. Grow the radius instead:
  PointCloud wide = cloud_with({{0.0, 0.0}, {1.0, 1.0}}, {0.8, 2.0});
  Neighborhoods n2 = build_neighborhoods(mesh, wide);
  // farthest-vertex distances: lower-left square triangles: sqrt(0.5) ~ 0.707
  // qualify at 0.8; the adjacent squares' triangles have farthest vertices at
  // distance >= sqrt(1.0 + 0.25) ~ 1.118 except the ones sharing the near
  // column/row whose far vertex is at sqrt(0.25 + 1.0); enumerating gives
  // exactly the two lower-left triangles.
  CHECK(n2.items[0].cells == std::vector<int>{0, 1});
  CHECK(n2.repair_rounds == 0);
}

TEST_CASE("tiny radii trigger the repair loop") {
  FineMesh mesh = build_structured_mesh(6, 6);
  PointCloud cloud = cloud_with({{0.25, 0.5}, {0.75, 0.5}}, {0.2, 0.2});
  Neighborhoods nbhds = build_neighborhoods(mesh, cloud);
  CHECK(nbhds.repair_rounds > 0);
  // coverage holds afterwards
  std::vector<int> count(mesh.n_cells(), 0);
  for (const auto& nb : nbhds.items)
    for (int c : nb.cells) ++count[c];
  for (int c = 0; c < mesh.n_cells(); ++c) CHECK(count[c] >= 1);
  // and the effective radii grew by the repair factor
  CHECK(nbhds.radii[0] == Catch::Approx(0.2 * std::pow(1.1, nbhds.repair_rounds)).epsilon(1e-12));
}

TEST_CASE("repair cap yields a coverage error") {
  FineMesh mesh = build_structured_mesh(8, 8);
  PointCloud cloud = cloud_with({{0.1, 0.1}}, {1e-6});
  CHECK_THROWS_AS(build_neighborhoods(mesh, cloud), NumericalError);
}

TEST_CASE("anchored connectivity keeps each neighborhood connected") {
  FineMesh mesh = build_structured_mesh(10, 10);
  PointCloud cloud = cloud_with({{0.2, 0.5}, {0.8, 0.5}, {0.5, 0.2}, {0.5, 0.8}},
                                compute_radii(cloud_with({{0.2, 0.5}, {0.8, 0.5}, {0.5, 0.2}, {0.5, 0.8}}, {}),
                                              2.0));
  Neighborhoods nbhds = build_neighborhoods(mesh, cloud);
  const auto adjacency = detail::cell_edge_neighbors(mesh);
  for (const auto& nb : nbhds.items) {
    REQUIRE(!nb.cells.empty());
    std::vector<char> member(mesh.n_cells(), 0), seen(mesh.n_cells(), 0);
    for (int c : nb.cells) member[c] = 1;
    std::vector<int> stack{nb.cells.front()};
    seen[nb.cells.front()] = 1;
    int reached = 0;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      ++reached;
      for (int x : adjacency[c])
        if (x >= 0 && member[x] && !seen[x]) {
          seen[x] = 1;
          stack.push_back(x);
        }
    }
    CHECK(reached == static_cast<int>(nb.cells.size()));
  }
}

TEST_CASE("coverage diagnostics on a single all-covering neighborhood") {
  FineMesh mesh = build_structured_mesh(3, 3);
  PointCloud cloud = cloud_with({{0.5, 0.5}}, {1.0});
  Neighborhoods nbhds = build_neighborhoods(mesh, cloud);
  CoverReport report = coverage_diagnostics(nbhds, mesh);
  CHECK(report.covered);
  CHECK(report.c_ov == 1);
  CHECK(report.lambda_max_overlap == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("two identical neighborhoods give C_ov = 2 and delta = 0") {
  FineMesh mesh = build_structured_mesh(3, 3);
  PointCloud cloud = cloud_with({{0.5, 0.5}, {0.5, 0.5}}, {1.0, 1.0});
  Neighborhoods nbhds = build_neighborhoods(mesh, cloud);
  CoverReport report = coverage_diagnostics(nbhds, mesh);
  CHECK(report.c_ov == 2);
  CHECK(report.delta == 0.0);
  CHECK(report.lambda_max_overlap == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("hand-enumerated delta on a strip chain") {
  // 5x1 strip: squares are 0.2 wide and 1 tall; triangles (2s, 2s+1) per
  // square s. Chain S0 = squares {0,1}, S1 = {1,2,3}, S2 = {3,4} leaves
  // every neighborhood with exclusively-owned cells.
  FineMesh mesh = build_structured_mesh(5, 1);
  Neighborhoods nbhds;
  nbhds.n_cells = mesh.n_cells();
  nbhds.n_vertices = mesh.n_vertices();
  nbhds.radii = {1.0, 1.0, 1.0};
  auto with_cells = [&](std::vector<int> cells) {
    Neighborhood nb;
    nb.cells = std::move(cells);
    for (int c : nb.cells)
      for (int v : mesh.triangles[c]) nb.nodes.push_back(v);
    std::sort(nb.nodes.begin(), nb.nodes.end());
    nb.nodes.erase(std::unique(nb.nodes.begin(), nb.nodes.end()), nb.nodes.end());
    return nb;
  };
  nbhds.items = {with_cells({0, 1, 2, 3}), with_cells({2, 3, 4, 5, 6, 7}),
                 with_cells({6, 7, 8, 9})};

  CoverReport report = coverage_diagnostics(nbhds, mesh);
  CHECK(report.covered);
  CHECK(report.c_ov == 2);
  // exclusive cells of S0 are square 0's triangles with centroids at
  // x = 2w/3 and x = w/3 (w = 0.2); the boundary of S0 contains the domain
  // edge x = 0, so delta_0 = w/3 = 1/15. S1's exclusive square 2 sits 4w/3
  // from the boundary of [0.2, 0.8] x [0, 1]; S2 mirrors S0. The minimum is
  // w/3.
  CHECK(report.delta == Catch::Approx(1.0 / 15.0).margin(1e-12));
  // path-graph overlap pattern of length 3: lambda_max = 1 + sqrt(2)
  CHECK(report.lambda_max_overlap == Catch::Approx(1.0 + std::sqrt(2.0)).margin(1e-8));
}

TEST_CASE("overlap spectral bound on disjoint and chained patterns") {
  FineMesh mesh = build_structured_mesh(5, 1);
  Neighborhoods nbhds;
  nbhds.n_cells = mesh.n_cells();
  nbhds.n_vertices = mesh.n_vertices();
  auto cells_of_square = [](int s) { return std::vector<int>{2 * s, 2 * s + 1}; };
  auto with_cells = [&](std::vector<int> cells) {
    Neighborhood nb;
    nb.cells = std::move(cells);
    return nb;
  };

  // disjoint: identity overlap matrix
  nbhds.items = {with_cells(cells_of_square(0)), with_cells(cells_of_square(2)),
                 with_cells(cells_of_square(4))};
  nbhds.radii = Vector(3, 1.0);
  CHECK(overlap_spectral_bound(nbhds) == Catch::Approx(1.0).margin(1e-9));

  // five mutually overlapping copies: the all-ones block has lambda = 5
  nbhds.items.assign(5, with_cells(cells_of_square(1)));
  nbhds.radii = Vector(5, 1.0);
  CHECK(overlap_spectral_bound(nbhds) == Catch::Approx(5.0).margin(1e-8));

  // path graph of length 5: lambda_max = 1 + 2cos(pi/6)
  nbhds.items = {with_cells({0, 1, 2}), with_cells({2, 3, 4}), with_cells({4, 5, 6}),
                 with_cells({6, 7, 8}), with_cells({8, 9})};
  nbhds.radii = Vector(5, 1.0);
  CHECK(overlap_spectral_bound(nbhds) ==
        Catch::Approx(1.0 + 2.0 * std::cos(M_PI / 6.0)).margin(1e-8));
}
