#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "msexp/app/experiment.hpp"

using namespace msexp;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("msexp_exp_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const std::string& out_dir) {
  ExperimentConfig c;
  c.nx = c.ny = 24;
  c.generator.n_horizontal = 1;
  c.generator.n_vertical = 1;
  c.generator.n_inclusions = 2;
  c.generator.thickness = 2;
  c.generator.seed = 5;
  c.contrast = 1e4;
  c.n_points = 9;
  c.seed = 2;
  c.beta = 0.01;
  c.gammas = {2.0, 3.0};
  c.basis_counts = {2, 3};
  c.step_counts = {20, 40};
  c.t_max = 0.2;
  c.model = ModelKind::linear;
  c.reference_steps = 400;
  c.output_dir = out_dir;
  return c;
}

}  // namespace

TEST_CASE("reference run decays and caches") {
  TempDir dir;
  ExperimentConfig config = small_config((dir.path / "out").string());
  ExperimentContext ctx = make_context(config);

  ReferenceResult first = run_reference(config, ctx);
  CHECK(!first.from_cache);
  CHECK(norm_inf(first.final_reduced) < norm_inf(ctx.p0_red));

  ReferenceResult second = run_reference(config, ctx);
  CHECK(second.from_cache);
  CHECK(second.final_reduced == first.final_reduced);

  // self-convergence: halved step roughly halves the final-state change
  ExperimentConfig half = config;
  half.reference_steps = 800;
  ExperimentConfig quarter = config;
  quarter.reference_steps = 1600;
  Vector r400 = first.final_reduced;
  Vector r800 = run_reference(half, ctx).final_reduced;
  Vector r1600 = run_reference(quarter, ctx).final_reduced;
  Vector d1 = r400, d2 = r800;
  axpy(-1.0, r800, d1);
  axpy(-1.0, r1600, d2);
  const double ratio = norm2(d1) / norm2(d2);
  CHECK(ratio > 1.5);  // ~2 for a first-order method
  CHECK(ratio < 3.0);
}

TEST_CASE("semilinear reference with zero data stays zero") {
  TempDir dir;
  ExperimentConfig config = small_config((dir.path / "out").string());
  config.model = ModelKind::semilinear;
  config.reference_steps = 50;
  ExperimentContext ctx = make_context(config);
  ctx.p0_full.assign(ctx.p0_full.size(), 0.0);
  ctx.p0_red.assign(ctx.p0_red.size(), 0.0);
  ReferenceResult ref = run_reference(config, ctx, /*use_cache=*/false);
  CHECK(norm_inf(ref.final_reduced) == 0.0);
}

TEST_CASE("sweep tables are complete, finite and deterministic") {
  TempDir dir;
  ExperimentConfig config = small_config((dir.path / "out1").string());
  ExperimentContext ctx = make_context(config);

  SweepResult sweep = run_sweep(config);
  REQUIRE(sweep.fd_gamma.rows.size() == 4);  // 2 gammas x 2 Ms
  REQUIRE(sweep.ei_gamma.rows.size() == 4);
  REQUIRE(sweep.fd_nt.rows.size() == 4);  // 2 Ms x 2 N_ts
  REQUIRE(sweep.ei_nt.rows.size() == 4);
  for (const auto* table : {&sweep.fd_gamma, &sweep.ei_gamma, &sweep.fd_nt, &sweep.ei_nt})
    for (const ErrorRow& row : table->rows) {
      CHECK(std::isfinite(row.l2_percent));
      CHECK(std::isfinite(row.h1_percent));
      CHECK(row.l2_percent >= 0.0);
      CHECK(row.h1_percent >= 0.0);
    }
  CHECK(sweep.diag0.covered);
  CHECK(sweep.diag0.c_ov >= 1);
  CHECK(sweep.diag0.lambda_max_overlap <= sweep.diag0.c_ov + 1e-9);

  write_sweep_outputs(config, ctx, sweep);
  for (const char* name : {"errors_fd_gamma.csv", "errors_ei_gamma.csv", "errors_fd_nt.csv",
                           "errors_ei_nt.csv", "field_fd.vtk", "field_ei.vtk", "cloud.csv",
                           "diag.json"})
    CHECK(std::filesystem::exists(dir.path / "out1" / name));

  // identical config, fresh output directory: identical bytes
  ExperimentConfig config2 = small_config((dir.path / "out2").string());
  ExperimentContext ctx2 = make_context(config2);
  SweepResult sweep2 = run_sweep(config2);
  write_sweep_outputs(config2, ctx2, sweep2);
  for (const char* name : {"errors_fd_gamma.csv", "errors_ei_gamma.csv", "errors_fd_nt.csv",
                           "errors_ei_nt.csv", "cloud.csv", "diag.json"})
    CHECK(slurp((dir.path / "out1" / name).string()) ==
          slurp((dir.path / "out2" / name).string()));

  // caching off reproduces the same rows bit-for-bit
  ExperimentConfig config3 = small_config((dir.path / "out3").string());
  SweepResult sweep3 = run_sweep(config3, /*use_cache=*/false);
  for (std::size_t i = 0; i < sweep.ei_nt.rows.size(); ++i) {
    CHECK(sweep3.ei_nt.rows[i].l2_percent == sweep.ei_nt.rows[i].l2_percent);
    CHECK(sweep3.fd_nt.rows[i].h1_percent == sweep.fd_nt.rows[i].h1_percent);
  }
}

TEST_CASE("context assembles the semilinear load only for that model") {
  TempDir dir;
  ExperimentConfig config = small_config((dir.path / "out").string());
  ExperimentContext linear_ctx = make_context(config);
  CHECK(!linear_ctx.load);
  config.model = ModelKind::semilinear;
  ExperimentContext semi_ctx = make_context(config);
  REQUIRE(static_cast<bool>(semi_ctx.load));
  // f(0) = 0
  Vector zero(semi_ctx.p0_red.size(), 0.0);
  CHECK(norm_inf(semi_ctx.load(zero)) == 0.0);
}
