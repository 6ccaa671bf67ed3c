#pragma once

#include <fstream>
#include <sstream>

#include "msexp/app/config.hpp"
#include "msexp/common.hpp"
#include "msexp/fem/mesh.hpp"
#include "msexp/fem/permeability.hpp"

namespace msexp {

/// Maps a per-square raster (row-major from the bottom row) onto the mesh
/// triangles; both triangles of a square share the square's value. Raster
/// dimensions must divide the mesh cell layout.
inline PermeabilityField raster_to_field(const FineMesh& mesh, int rx, int ry,
                                         const Vector& raster) {
  require(rx >= 1 && ry >= 1, "raster_to_field: raster dimensions must be positive");
  require(static_cast<int>(raster.size()) == rx * ry, "raster_to_field: value count mismatch");
  if (mesh.nx % rx != 0 || mesh.ny % ry != 0)
    throw ConfigError("permeability raster " + std::to_string(rx) + "x" + std::to_string(ry) +
                      " does not divide the mesh layout " + std::to_string(mesh.nx) + "x" +
                      std::to_string(mesh.ny));
  const int sx = mesh.nx / rx;
  const int sy = mesh.ny / ry;
  Vector cells(mesh.n_cells());
  for (int j = 0; j < mesh.ny; ++j)
    for (int i = 0; i < mesh.nx; ++i) {
      const double v = raster[(j / sy) * rx + (i / sx)];
      const int square = j * mesh.nx + i;
      cells[2 * square] = v;
      cells[2 * square + 1] = v;
    }
  return make_permeability(std::move(cells));
}

/// Reads a raster file: first line "nx ny", then nx*ny whitespace-separated
/// positive reals, row-major from the bottom row.
inline PermeabilityField load_permeability(const std::string& path, const FineMesh& mesh) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_permeability: cannot open '" + path + "'");
  int rx = 0, ry = 0;
  if (!(in >> rx >> ry))
    throw ConfigError("load_permeability: '" + path + "' has no dimension header");
  Vector raster(static_cast<std::size_t>(rx) * ry);
  for (double& v : raster)
    if (!(in >> v))
      throw ConfigError("load_permeability: '" + path + "' ended before " +
                        std::to_string(raster.size()) + " values");
  for (double v : raster)
    if (!(v > 0.0)) throw ConfigError("load_permeability: nonpositive value in '" + path + "'");
  return raster_to_field(mesh, rx, ry, raster);
}

inline void save_raster(const std::string& path, int rx, int ry, const Vector& raster) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_raster: cannot open '" + path + "' for writing");
  out << rx << " " << ry << "\n";
  for (int j = 0; j < ry; ++j) {
    for (int i = 0; i < rx; ++i) out << (i ? " " : "") << raster[j * rx + i];
    out << "\n";
  }
}

/// Synthetic high-contrast medium on the mesh squares: unit background,
/// full-span horizontal and vertical channels plus blocky inclusions at the
/// contrast value. Deterministic in the generator seed.
inline Vector generate_raster(const GeneratorSpec& spec, int nx, int ny, double contrast) {
  Vector raster(static_cast<std::size_t>(nx) * ny, 1.0);
  Rng rng(spec.seed);
  const int th = std::max(1, spec.thickness);

  auto paint = [&](int i0, int j0, int w, int h) {
    for (int j = std::max(0, j0); j < std::min(ny, j0 + h); ++j)
      for (int i = std::max(0, i0); i < std::min(nx, i0 + w); ++i)
        raster[static_cast<std::size_t>(j) * nx + i] = contrast;
  };

  for (int k = 0; k < spec.n_horizontal; ++k)
    paint(0, 1 + static_cast<int>(rng.next_below(std::max(1, ny - th - 2))), nx, th);
  for (int k = 0; k < spec.n_vertical; ++k)
    paint(1 + static_cast<int>(rng.next_below(std::max(1, nx - th - 2))), 0, th, ny);
  for (int k = 0; k < spec.n_inclusions; ++k) {
    const int w = 2 + static_cast<int>(rng.next_below(std::max(1, nx / 12)));
    const int h = 2 + static_cast<int>(rng.next_below(std::max(1, ny / 12)));
    paint(static_cast<int>(rng.next_below(std::max(1, nx - w))),
          static_cast<int>(rng.next_below(std::max(1, ny - h))), w, h);
  }
  return raster;
}

inline PermeabilityField generate_permeability(const GeneratorSpec& spec, const FineMesh& mesh,
                                               double contrast) {
  return raster_to_field(mesh, mesh.nx, mesh.ny, generate_raster(spec, mesh.nx, mesh.ny, contrast));
}

/// Permeability as configured: committed raster file or generator.
inline PermeabilityField make_permeability_field(const ExperimentConfig& config,
                                                 const FineMesh& mesh) {
  if (!config.kappa_file.empty()) return load_permeability(config.resolved_kappa_file(), mesh);
  return generate_permeability(config.generator, mesh, config.contrast);
}

}  // namespace msexp
