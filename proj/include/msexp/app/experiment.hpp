#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <tuple>

#include "msexp/app/config.hpp"
#include "msexp/app/export.hpp"
#include "msexp/app/raster.hpp"
#include "msexp/basis/interpolant.hpp"
#include "msexp/basis/local_basis.hpp"
#include "msexp/basis/shape.hpp"
#include "msexp/basis/space.hpp"
#include "msexp/coarse/density.hpp"
#include "msexp/common.hpp"
#include "msexp/fem/norms.hpp"
#include "msexp/time/integrators.hpp"

namespace msexp {

/// Everything derived from the config that the runs share: mesh, medium,
/// assembled matrices, initial state and the nonlinear load.
struct ExperimentContext {
  FineMesh mesh;
  PermeabilityField kappa;
  SparseMatrix m_full;   // unit mass, full
  SparseMatrix m_red;    // unit mass, interior
  SparseMatrix a_red;    // kappa stiffness, interior
  SparseMatrix mk_full;  // kappa-weighted mass for norms
  SparseMatrix ak_full;  // kappa-weighted stiffness for norms
  Vector p0_full;
  Vector p0_red;
  LoadFn load;  // null for the linear model
};

/// The nonlinear source of the semilinear test case.
inline double semilinear_source(double p) { return -p * (1.0 - p) * (1.0 + p); }

inline LoadFn make_semilinear_load(const FineMesh& mesh, const SparseMatrix& m_full) {
  auto mass = std::make_shared<const SparseMatrix>(m_full);
  auto interior = std::make_shared<const std::vector<int>>(mesh.interior_nodes);
  const int n_vertices = mesh.n_vertices();
  return [mass, interior, n_vertices](const Vector& p_red) {
    Vector p_full(n_vertices, 0.0);
    for (std::size_t k = 0; k < interior->size(); ++k) p_full[(*interior)[k]] = p_red[k];
    for (double& v : p_full) v = semilinear_source(v);
    const Vector b_full = mass->apply(p_full);
    Vector b_red(interior->size());
    for (std::size_t k = 0; k < interior->size(); ++k) b_red[k] = b_full[(*interior)[k]];
    return b_red;
  };
}

inline Vector initial_condition(const FineMesh& mesh) {
  Vector p0(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Point& p = mesh.vertices[v];
    p0[v] = p.x * (1.0 - p.x) * p.y * (1.0 - p.y);
  }
  return p0;
}

inline ExperimentContext make_context(const ExperimentConfig& config) {
  ExperimentContext ctx;
  ctx.mesh = build_structured_mesh(config.nx, config.ny);
  ctx.kappa = make_permeability_field(config, ctx.mesh);
  ctx.m_full = assemble_mass(ctx.mesh);
  ctx.m_red = reduce_matrix(ctx.m_full, ctx.mesh);
  ctx.a_red = reduce_matrix(assemble_stiffness(ctx.mesh, ctx.kappa), ctx.mesh);
  ctx.mk_full = assemble_mass(ctx.mesh, ctx.kappa);
  ctx.ak_full = assemble_stiffness(ctx.mesh, ctx.kappa);
  ctx.p0_full = initial_condition(ctx.mesh);
  ctx.p0_red = reduce_vector(ctx.p0_full, ctx.mesh);
  if (config.model == ModelKind::semilinear)
    ctx.load = make_semilinear_load(ctx.mesh, ctx.m_full);
  return ctx;
}

// ---- reference solution with on-disk caching ----

namespace detail {

inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t reference_key(const ExperimentConfig& config, const PermeabilityField& kappa) {
  std::uint64_t h = fnv1a(&config.nx, sizeof config.nx);
  h = fnv1a(&config.ny, sizeof config.ny, h);
  h = fnv1a(kappa.cell_values.data(), kappa.cell_values.size() * sizeof(double), h);
  const int model = static_cast<int>(config.model);
  h = fnv1a(&model, sizeof model, h);
  h = fnv1a(&config.reference_steps, sizeof config.reference_steps, h);
  h = fnv1a(&config.t_max, sizeof config.t_max, h);
  h = fnv1a(&config.picard, sizeof config.picard, h);
  return h;
}

inline std::string reference_cache_path(const ExperimentConfig& config,
                                        const PermeabilityField& kappa) {
  char name[64];
  std::snprintf(name, sizeof name, "ref_%016llx.bin",
                static_cast<unsigned long long>(reference_key(config, kappa)));
  return (std::filesystem::path(config.output_dir) / name).string();
}

inline bool read_reference_cache(const std::string& path, std::size_t expected, Vector& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8] = {};
  in.read(magic, 8);
  if (std::string(magic, 8) != "MSEXPRF1") return false;
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || count != expected) return false;
  out.resize(count);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count * sizeof(double)));
  return static_cast<bool>(in);
}

inline void write_reference_cache(const std::string& path, const Vector& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return;  // cache is best-effort
  out.write("MSEXPRF1", 8);
  const std::uint64_t count = state.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(state.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
}

}  // namespace detail

struct ReferenceResult {
  Vector final_reduced;
  bool from_cache = false;
  std::string cache_path;
};

/// Fine-scale backward-Euler reference at the configured step count, cached
/// in the output directory by a content hash of (mesh, kappa, model, N_t).
inline ReferenceResult run_reference(const ExperimentConfig& config, const ExperimentContext& ctx,
                                     bool use_cache = true) {
  ReferenceResult ref;
  ref.cache_path = detail::reference_cache_path(config, ctx.kappa);
  if (use_cache &&
      detail::read_reference_cache(ref.cache_path, ctx.p0_red.size(), ref.final_reduced)) {
    ref.from_cache = true;
    return ref;
  }
  const TimeGrid grid = TimeGrid::uniform(config.t_max, config.reference_steps);
  SolveResult solve =
      fine_backward_euler(ctx.m_red, ctx.a_red, ctx.load, ctx.p0_red, grid, {}, config.picard);
  ref.final_reduced = std::move(solve.final_state);
  if (use_cache) {
    std::filesystem::create_directories(config.output_dir);
    detail::write_reference_cache(ref.cache_path, ref.final_reduced);
  }
  return ref;
}

// ---- coarse-scale construction shared by the sweep and the diagnostics ----

/// Point cloud, neighborhoods, shapes and local eigenbases for one gamma.
/// Bases hold m_max eigenpairs so any smaller M slices out of them.
struct CoarseScale {
  PointCloud cloud;
  Neighborhoods neighborhoods;
  ShapeFunctions shapes;
  std::vector<LocalEigenBasis> bases;
  int m_max = 0;
};

inline std::vector<LocalEigenBasis> build_local_bases(const Neighborhoods& neighborhoods,
                                                      const FineMesh& mesh,
                                                      const PermeabilityField& kappa, int m_max,
                                                      int n_threads = 0) {
  const int n = neighborhoods.size();
  std::vector<LocalEigenBasis> bases(n);
  if (n_threads <= 0)
    n_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n_threads = std::min(n_threads, n);

  if (n_threads <= 1) {
    for (int i = 0; i < n; ++i)
      bases[i] = local_spectral_basis(neighborhoods.items[i], i, mesh, kappa, m_max);
    return bases;
  }

  // Independent per-neighborhood solves; merged by index, so the result is
  // the same as the sequential loop.
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        bases[i] = local_spectral_basis(neighborhoods.items[i], i, mesh, kappa, m_max);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return bases;
}

inline CoarseScale build_coarse_scale(const ExperimentConfig& config, const ExperimentContext& ctx,
                                      const Vector& density, double gamma, int m_max,
                                      int n_threads = 0) {
  CoarseScale cs;
  cs.m_max = m_max;
  cs.cloud = generate_point_cloud(density, ctx.mesh, config.n_points, config.seed,
                                  config.cvt_max_iters);
  cs.cloud.gamma = gamma;
  cs.cloud.radii = compute_radii(cs.cloud, gamma);
  cs.neighborhoods = build_neighborhoods(ctx.mesh, cs.cloud);
  cs.shapes = shape_functions(cs.cloud, ctx.mesh, cs.neighborhoods);
  cs.bases = build_local_bases(cs.neighborhoods, ctx.mesh, ctx.kappa, m_max, n_threads);
  return cs;
}

// ---- the error sweep ----

struct SweepResult {
  ErrorTable fd_gamma{"gamma", {}};
  ErrorTable ei_gamma{"gamma", {}};
  ErrorTable fd_nt{"N_t", {}};
  ErrorTable ei_nt{"N_t", {}};
  Vector field_fd;  // full nodal pressure at the first (gamma, M, N_t) combo
  Vector field_ei;
  Vector reference_full;
  PointCloud cloud0;
  Vector radii0;  // effective radii of the first gamma's cover
  CoverReport diag0;
};

namespace detail {

struct PercentErrors {
  double l2 = 0.0;
  double h1 = 0.0;
};

inline PercentErrors percent_errors(const ExperimentContext& ctx, const Vector& ref_red,
                                    const WeightedNorms& ref_norms, const Vector& run_red) {
  Vector e(ref_red);
  axpy(-1.0, run_red, e);
  const WeightedNorms en = weighted_norms(expand_vector(e, ctx.mesh), ctx.mk_full, ctx.ak_full);
  PercentErrors p;
  p.l2 = ref_norms.l2 > 0.0 ? 100.0 * en.l2 / ref_norms.l2 : 0.0;
  p.h1 = ref_norms.h1 > 0.0 ? 100.0 * en.h1 / ref_norms.h1 : 0.0;
  return p;
}

}  // namespace detail

/// Runs the full study: builds the coarse scale per gamma (local eigenbases
/// computed once at the largest M and sliced), times both methods over the
/// parameter grid and collects the paper-style error tables. Table rows are
/// sorted by (M, param) regardless of execution order.
inline SweepResult run_sweep(const ExperimentConfig& config, bool use_cache = true) {
  ExperimentContext ctx = make_context(config);
  const ReferenceResult ref = run_reference(config, ctx, use_cache);
  const Vector ref_full = expand_vector(ref.final_reduced, ctx.mesh);
  const WeightedNorms ref_norms = weighted_norms(ref_full, ctx.mk_full, ctx.ak_full);

  const Vector density = compute_density(ctx.mesh, ctx.kappa, ctx.p0_full, config.beta);
  const int m_max = *std::max_element(config.basis_counts.begin(), config.basis_counts.end());
  const int nt0 = config.step_counts.front();

  SweepResult sweep;
  sweep.reference_full = ref_full;

  // (gamma index, M, N_t) -> errors per method
  std::map<std::tuple<int, int, int>, detail::PercentErrors> fd_errors, ei_errors;

  for (std::size_t gi = 0; gi < config.gammas.size(); ++gi) {
    const double gamma = config.gammas[gi];
    const CoarseScale cs = build_coarse_scale(config, ctx, density, gamma, m_max);

    if (gi == 0) {
      sweep.cloud0 = cs.cloud;
      sweep.radii0 = cs.neighborhoods.radii;
      sweep.diag0 = coverage_diagnostics(cs.neighborhoods, ctx.mesh);
    }

    // N_t values needed at this gamma
    std::vector<int> nts = gi == 0 ? config.step_counts : std::vector<int>{nt0};
    if (std::find(nts.begin(), nts.end(), nt0) == nts.end()) nts.push_back(nt0);

    for (int m : config.basis_counts) {
      const MultiscaleSpace space =
          build_multiscale_space(cs.bases, cs.shapes, cs.neighborhoods, ctx.mesh, m);
      auto [m0, a0] = coarse_matrices(space, ctx.m_red, ctx.a_red);
      const EigenPencilDecomp base_decomp =
          coarse_pencil_eig(m0, a0, TimeGrid::uniform(config.t_max, nts.front()).tau);

      for (int nt : nts) {
        const TimeGrid grid = TimeGrid::uniform(config.t_max, nt);
        const EigenPencilDecomp decomp = with_time_step(base_decomp, grid.tau);

        SolveResult fd = mfgmsfem_fd_run(space, ctx.m_red, ctx.a_red, m0, a0, ctx.load, ctx.p0_red,
                                         grid, {}, config.picard);
        SolveResult ei =
            mfgmsfem_ei_run(space, ctx.m_red, ctx.a_red, ctx.load, ctx.p0_red, grid, decomp);

        const auto key = std::make_tuple(static_cast<int>(gi), m, nt);
        fd_errors[key] = detail::percent_errors(ctx, ref.final_reduced, ref_norms, fd.final_state);
        ei_errors[key] = detail::percent_errors(ctx, ref.final_reduced, ref_norms, ei.final_state);

        if (gi == 0 && m == config.basis_counts.front() && nt == nt0) {
          sweep.field_fd = expand_vector(fd.final_state, ctx.mesh);
          sweep.field_ei = expand_vector(ei.final_state, ctx.mesh);
        }
      }
    }
  }

  for (int m : config.basis_counts)
    for (std::size_t gi = 0; gi < config.gammas.size(); ++gi) {
      const auto key = std::make_tuple(static_cast<int>(gi), m, nt0);
      sweep.fd_gamma.rows.push_back(
          {m, config.gammas[gi], fd_errors.at(key).l2, fd_errors.at(key).h1});
      sweep.ei_gamma.rows.push_back(
          {m, config.gammas[gi], ei_errors.at(key).l2, ei_errors.at(key).h1});
    }
  for (int m : config.basis_counts)
    for (int nt : config.step_counts) {
      const auto key = std::make_tuple(0, m, nt);
      sweep.fd_nt.rows.push_back(
          {m, static_cast<double>(nt), fd_errors.at(key).l2, fd_errors.at(key).h1});
      sweep.ei_nt.rows.push_back(
          {m, static_cast<double>(nt), ei_errors.at(key).l2, ei_errors.at(key).h1});
    }
  return sweep;
}

/// Writes the sweep artifacts into the output directory.
inline void write_sweep_outputs(const ExperimentConfig& config, const ExperimentContext& ctx,
                                const SweepResult& sweep) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  const fs::path out(config.output_dir);
  export_table_csv(sweep.fd_gamma, (out / "errors_fd_gamma.csv").string());
  export_table_csv(sweep.ei_gamma, (out / "errors_ei_gamma.csv").string());
  export_table_csv(sweep.fd_nt, (out / "errors_fd_nt.csv").string());
  export_table_csv(sweep.ei_nt, (out / "errors_ei_nt.csv").string());
  export_field_vtk(sweep.field_fd, ctx.kappa, ctx.mesh, (out / "field_fd.vtk").string());
  export_field_vtk(sweep.field_ei, ctx.kappa, ctx.mesh, (out / "field_ei.vtk").string());
  export_cloud_csv(sweep.cloud0, sweep.radii0, (out / "cloud.csv").string());
  export_diag_json(sweep.diag0, (out / "diag.json").string());
}

}  // namespace msexp
