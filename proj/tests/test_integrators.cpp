#include <catch_amalgamated.hpp>

#include "msexp/app/experiment.hpp"
#include "msexp/time/integrators.hpp"

using namespace msexp;

namespace {

MultiscaleSpace identity_space(int n) {
  MultiscaleSpace space;
  space.r0 = identity_csr(n);
  space.n_interior = n;
  space.row_index.resize(n);
  space.row_neighbors.assign(n, {});
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) {
    space.row_index[i] = {i, 0};
    all[i] = i;
  }
  for (int i = 0; i < n; ++i) space.row_neighbors[i] = all;
  return space;
}

struct CoarseProblem {
  FineMesh mesh;
  PermeabilityField kappa;
  SparseMatrix m_red, a_red;
  Vector p0_red;
  MultiscaleSpace space;
};

CoarseProblem small_multiscale_problem(int n_points, int n_b, double gamma) {
  CoarseProblem prob;
  prob.mesh = build_structured_mesh(12, 12);
  prob.kappa = uniform_permeability(prob.mesh);
  prob.m_red = reduce_matrix(assemble_mass(prob.mesh), prob.mesh);
  prob.a_red = reduce_matrix(assemble_stiffness(prob.mesh, prob.kappa), prob.mesh);
  prob.p0_red = reduce_vector(initial_condition(prob.mesh), prob.mesh);

  Vector density(prob.mesh.n_vertices(), 1.0);
  PointCloud cloud = generate_point_cloud(density, prob.mesh, n_points, 17, 100);
  cloud.radii = compute_radii(cloud, gamma);
  Neighborhoods nbhds = build_neighborhoods(prob.mesh, cloud);
  ShapeFunctions shapes = shape_functions(cloud, prob.mesh, nbhds);
  std::vector<LocalEigenBasis> bases;
  for (int i = 0; i < nbhds.size(); ++i)
    bases.push_back(local_spectral_basis(nbhds.items[i], i, prob.mesh, prob.kappa, n_b));
  prob.space = build_multiscale_space(bases, shapes, nbhds, prob.mesh, n_b);
  return prob;
}

}  // namespace

TEST_CASE("backward Euler without dynamics keeps the state") {
  SparseMatrix m = identity_csr(3);
  SparseMatrix a = csr_from_triplets({}, 3, 3);
  Vector p0{1.0, -2.0, 0.25};
  SolveResult r = fine_backward_euler(m, a, nullptr, p0, TimeGrid::uniform(1.0, 10));
  for (int i = 0; i < 3; ++i) CHECK(r.final_state[i] == Catch::Approx(p0[i]).margin(1e-14));
}

TEST_CASE("backward Euler reproduces the scalar closed form") {
  SparseMatrix one = identity_csr(1);
  const TimeGrid grid = TimeGrid::uniform(1.0, 20);
  SolveResult r = fine_backward_euler(one, one, nullptr, {1.0}, grid);
  CHECK(r.final_state[0] == Catch::Approx(std::pow(1.0 + grid.tau, -20.0)).epsilon(1e-12));
}

TEST_CASE("heat decay on the fine grid approaches the analytic rate") {
  FineMesh mesh = build_structured_mesh(24, 24);
  SparseMatrix m = reduce_matrix(assemble_mass(mesh), mesh);
  SparseMatrix a = reduce_matrix(assemble_stiffness(mesh, uniform_permeability(mesh)), mesh);
  Vector p0(mesh.n_interior());
  for (int k = 0; k < mesh.n_interior(); ++k) {
    const Point& p = mesh.vertices[mesh.interior_nodes[k]];
    p0[k] = std::sin(M_PI * p.x) * std::sin(M_PI * p.y);
  }
  const double t_max = 0.05;
  SolveResult full = fine_backward_euler(m, a, nullptr, p0, TimeGrid::uniform(t_max, 400));
  SolveResult half = fine_backward_euler(m, a, nullptr, p0, TimeGrid::uniform(t_max, 800));
  SolveResult tiny = fine_backward_euler(m, a, nullptr, p0, TimeGrid::uniform(t_max, 12800));

  // analytic decay of the first mode, within the spatial-plus-temporal band
  const double decay = std::exp(-2.0 * M_PI * M_PI * t_max);
  const int mid = mesh.interior_index[mesh.vertex_id(12, 12)];
  CHECK(std::abs(full.final_state[mid] - decay) <= 5e-3);

  // first order in time: against a time-resolved run on the same mesh the
  // halved step halves the error
  Vector d1 = full.final_state, d2 = half.final_state;
  axpy(-1.0, tiny.final_state, d1);
  axpy(-1.0, tiny.final_state, d2);
  const double ratio = norm2(d1) / norm2(d2);
  CHECK(ratio > 1.7);
  CHECK(ratio < 2.4);
}

TEST_CASE("backward Euler energy is nonincreasing for the pure decay problem") {
  FineMesh mesh = build_structured_mesh(10, 10);
  SparseMatrix m = reduce_matrix(assemble_mass(mesh), mesh);
  SparseMatrix a = reduce_matrix(assemble_stiffness(mesh, uniform_permeability(mesh)), mesh);
  Vector p0 = reduce_vector(initial_condition(mesh), mesh);
  std::vector<int> steps(21);
  for (int s = 0; s <= 20; ++s) steps[s] = s;
  SolveResult r = fine_backward_euler(m, a, nullptr, p0, TimeGrid::uniform(0.1, 20), steps);
  REQUIRE(r.snapshots.size() == steps.size());
  double prev = std::sqrt(dot(r.snapshots[0], m.apply(r.snapshots[0])));
  for (std::size_t s = 1; s < r.snapshots.size(); ++s) {
    const double cur = std::sqrt(dot(r.snapshots[s], m.apply(r.snapshots[s])));
    CHECK(cur <= prev * (1.0 + 1e-13));
    prev = cur;
  }
}

TEST_CASE("FD with the identity projection matches the fine integrator stepwise") {
  FineMesh mesh = build_structured_mesh(8, 8);
  SparseMatrix m = reduce_matrix(assemble_mass(mesh), mesh);
  SparseMatrix a = reduce_matrix(assemble_stiffness(mesh, uniform_permeability(mesh)), mesh);
  Vector p0 = reduce_vector(initial_condition(mesh), mesh);
  MultiscaleSpace space = identity_space(mesh.n_interior());

  std::vector<int> steps{1, 5, 10};
  const TimeGrid grid = TimeGrid::uniform(0.05, 10);
  // exercise the semilinear path too: the load closure sees reduced states
  LoadFn load = make_semilinear_load(mesh, assemble_mass(mesh));
  SolveResult fine = fine_backward_euler(m, a, load, p0, grid, steps);
  SolveResult fd = mfgmsfem_fd_run(space, m, a, load, p0, grid, steps);
  REQUIRE(fine.snapshots.size() == fd.snapshots.size());
  for (std::size_t s = 0; s < steps.size(); ++s) {
    double worst = 0.0;
    for (int i = 0; i < mesh.n_interior(); ++i)
      worst = std::max(worst, std::abs(fine.snapshots[s][i] - fd.snapshots[s][i]));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("FD single-DOF system follows the projected scalar closed form") {
  // 1x1 coarse space built by hand: M0 = 1, A0 = a
  SparseMatrix m = identity_csr(1);
  SparseMatrix a = csr_from_triplets({{0, 0, 3.0}}, 1, 1);
  MultiscaleSpace space = identity_space(1);
  const TimeGrid grid = TimeGrid::uniform(1.0, 25);
  SolveResult fd = mfgmsfem_fd_run(space, m, a, nullptr, {2.0}, grid);
  CHECK(fd.final_state[0] == Catch::Approx(2.0 * std::pow(1.0 + 3.0 * grid.tau, -25.0)).epsilon(1e-12));
}

TEST_CASE("coarse pencil decomposition: diagonal case and contracts") {
  SparseMatrix m0 = identity_csr(3);
  SparseMatrix a0 = csr_from_triplets({{0, 0, 1.0}, {1, 1, 4.0}, {2, 2, 9.0}}, 3, 3);
  const double tau = 0.5;
  EigenPencilDecomp d = coarse_pencil_eig(m0, a0, tau);
  // ascending D0: -4.5, -2, -0.5
  CHECK(d.eigenvalues[0] == Catch::Approx(-4.5).margin(1e-13));
  CHECK(d.eigenvalues[1] == Catch::Approx(-2.0).margin(1e-13));
  CHECK(d.eigenvalues[2] == Catch::Approx(-0.5).margin(1e-13));

  // Q0^T M0 Q0 = I and the reconstruction residual contract
  DenseMatrix q = d.eigenvectors;
  DenseMatrix g = matmul(q.transposed(), matmul(DenseMatrix::from_sparse(m0), q));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(g(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-10);

  DenseMatrix lhs = matmul(DenseMatrix::from_sparse(a0), q);
  for (auto& v : lhs.values()) v *= -tau;
  DenseMatrix rhs = matmul(DenseMatrix::from_sparse(m0), q);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) rhs(i, j) *= d.eigenvalues[j];
  double fro = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) fro += (lhs(i, j) - rhs(i, j)) * (lhs(i, j) - rhs(i, j));
  CHECK(std::sqrt(fro) <= 1e-8 * tau * DenseMatrix::from_sparse(a0).frobenius_norm());
}

TEST_CASE("EI reproduces the scalar exponential through the identity projection") {
  SparseMatrix m = identity_csr(1);
  const double a_val = 1.0;
  SparseMatrix a = csr_from_triplets({{0, 0, a_val}}, 1, 1);
  MultiscaleSpace space = identity_space(1);
  const TimeGrid grid = TimeGrid::uniform(1.0, 10);
  SolveResult ei = mfgmsfem_ei_run(space, m, a, nullptr, {1.0}, grid);
  CHECK(ei.final_state[0] == Catch::Approx(std::exp(-a_val * 1.0)).epsilon(1e-12));
}

TEST_CASE("EI semigroup exactness: many small steps equal one large step") {
  CoarseProblem prob = small_multiscale_problem(9, 3, 2.0);
  const double t_max = 0.2;
  SolveResult one = mfgmsfem_ei_run(prob.space, prob.m_red, prob.a_red, nullptr, prob.p0_red,
                                    TimeGrid::uniform(t_max, 1));
  SolveResult many = mfgmsfem_ei_run(prob.space, prob.m_red, prob.a_red, nullptr, prob.p0_red,
                                     TimeGrid::uniform(t_max, 50));
  Vector diff = one.final_state;
  axpy(-1.0, many.final_state, diff);
  CHECK(norm2(diff) <= 1e-9 * norm2(one.final_state));
}

TEST_CASE("EI step is affine in the state for the linear model") {
  CoarseProblem prob = small_multiscale_problem(9, 2, 2.0);
  const TimeGrid grid = TimeGrid::uniform(0.01, 1);
  auto [m0, a0] = coarse_matrices(prob.space, prob.m_red, prob.a_red);
  EigenPencilDecomp decomp = coarse_pencil_eig(m0, a0, grid.tau);

  Rng rng(41);
  const int n = prob.m_red.rows();
  Vector u(n), v(n);
  for (auto& x : u) x = rng.uniform(-1.0, 1.0);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  const double alpha = 0.7, beta = -1.3;

  auto step = [&](const Vector& p) {
    Vector r = prob.a_red.apply(p);
    scale(r, -1.0);
    Vector delta = apply_phi1_pencil(decomp, restrict_to_coarse(prob.space, r));
    Vector next = p;
    axpy(grid.tau, prolongate(prob.space, delta), next);
    return next;
  };

  Vector combo(n);
  for (int i = 0; i < n; ++i) combo[i] = alpha * u[i] + beta * v[i];
  Vector lhs = step(combo);
  Vector su = step(u), sv = step(v);
  for (int i = 0; i < n; ++i)
    CHECK(lhs[i] == Catch::Approx(alpha * su[i] + beta * sv[i]).margin(1e-10));
}

TEST_CASE("FD and EI agree in the small-step limit on a 10-DOF coarse space") {
  CoarseProblem prob = small_multiscale_problem(10, 1, 2.5);
  REQUIRE(prob.space.n_coarse() == 10);
  const TimeGrid grid = TimeGrid::uniform(0.02, 10000);
  SolveResult fd =
      mfgmsfem_fd_run(prob.space, prob.m_red, prob.a_red, nullptr, prob.p0_red, grid);
  SolveResult ei =
      mfgmsfem_ei_run(prob.space, prob.m_red, prob.a_red, nullptr, prob.p0_red, grid);
  Vector diff = fd.final_state;
  axpy(-1.0, ei.final_state, diff);
  CHECK(norm2(diff) <= 1e-4 * norm2(ei.final_state));
}

TEST_CASE("project_initial is idempotent and mass-orthogonal") {
  CoarseProblem prob = small_multiscale_problem(9, 3, 2.0);
  auto [m0, a0] = coarse_matrices(prob.space, prob.m_red, prob.a_red);
  (void)a0;

  Vector projected = project_initial(prob.space, prob.m_red, m0, prob.p0_red);
  Vector twice = project_initial(prob.space, prob.m_red, m0, projected);
  Vector diff = twice;
  axpy(-1.0, projected, diff);
  CHECK(norm2(diff) <= 1e-10 * std::max(1.0, norm2(projected)));

  // residual is mass-orthogonal to the coarse space
  Vector residual = prob.p0_red;
  axpy(-1.0, projected, residual);
  Vector coarse_residual = restrict_to_coarse(prob.space, prob.m_red.apply(residual));
  CHECK(norm_inf(coarse_residual) <= 1e-9 * norm_inf(prob.m_red.apply(prob.p0_red)));

  // zero goes to zero
  Vector zero(prob.m_red.rows(), 0.0);
  CHECK(norm2(project_initial(prob.space, prob.m_red, m0, zero)) == 0.0);
}

TEST_CASE("project_initial matches a dense pseudo-projection oracle") {
  CoarseProblem prob = small_multiscale_problem(9, 2, 2.0);
  auto [m0, a0] = coarse_matrices(prob.space, prob.m_red, prob.a_red);
  (void)a0;
  Rng rng(61);
  Vector p0(prob.m_red.rows());
  for (auto& v : p0) v = rng.uniform(-1.0, 1.0);

  Vector ours = project_initial(prob.space, prob.m_red, m0, p0);

  DenseMatrix r0 = DenseMatrix::from_sparse(prob.space.r0);
  DenseMatrix gram = matmul(matmul(r0, DenseMatrix::from_sparse(prob.m_red)), r0.transposed());
  Vector rhs = r0.apply(prob.m_red.apply(p0));
  Vector c = DenseCholesky(gram).solve(rhs);
  Vector oracle = r0.apply_transpose(c);
  for (std::size_t i = 0; i < oracle.size(); ++i)
    CHECK(ours[i] == Catch::Approx(oracle[i]).margin(1e-9));
}

TEST_CASE("semilinear fixed point: zero initial data stays zero") {
  FineMesh mesh = build_structured_mesh(8, 8);
  SparseMatrix m = reduce_matrix(assemble_mass(mesh), mesh);
  SparseMatrix a = reduce_matrix(assemble_stiffness(mesh, uniform_permeability(mesh)), mesh);
  LoadFn load = make_semilinear_load(mesh, assemble_mass(mesh));
  Vector zero(mesh.n_interior(), 0.0);
  const TimeGrid grid = TimeGrid::uniform(0.2, 10);

  CHECK(norm_inf(fine_backward_euler(m, a, load, zero, grid).final_state) == 0.0);

  MultiscaleSpace space = identity_space(mesh.n_interior());
  CHECK(norm_inf(mfgmsfem_fd_run(space, m, a, load, zero, grid).final_state) == 0.0);
  CHECK(norm_inf(mfgmsfem_ei_run(space, m, a, load, zero, grid).final_state) == 0.0);
}

TEST_CASE("pencil decomposition scales to the coarse sizes used in studies") {
  CoarseProblem prob = small_multiscale_problem(16, 3, 2.0);
  auto [m0, a0] = coarse_matrices(prob.space, prob.m_red, prob.a_red);
  detail::StopWatch watch;
  EigenPencilDecomp d = coarse_pencil_eig(m0, a0, 0.004);
  CHECK(watch.seconds() < 60.0);
  for (double v : d.eigenvalues) CHECK(v <= 1e-10);
}
