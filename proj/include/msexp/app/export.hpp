#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "msexp/coarse/cvt.hpp"
#include "msexp/coarse/neighborhoods.hpp"
#include "msexp/common.hpp"
#include "msexp/fem/mesh.hpp"
#include "msexp/fem/permeability.hpp"

namespace msexp {

/// One error-table row in the paper's layout: the basis count M plus the
/// varied parameter (gamma or N_t).
struct ErrorRow {
  int basis_count = 0;
  double param = 0.0;
  double l2_percent = 0.0;
  double h1_percent = 0.0;
};

struct ErrorTable {
  std::string param_name;  // "gamma" or "N_t"
  std::vector<ErrorRow> rows;
};

/// Fixed three decimals with round-half-even ties, matching the tables.
inline std::string format_fixed3(double x) {
  double scaled = std::nearbyint(x * 1000.0);
  long long n = static_cast<long long>(scaled);
  const bool neg = n < 0;
  if (neg) n = -n;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%lld.%03lld", neg ? "-" : "", n / 1000, n % 1000);
  return buf;
}

inline std::string format_param(double p) {
  // N_t values print as integers, gamma keeps its decimals
  if (p == std::floor(p) && std::abs(p) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(p));
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

inline void export_table_csv(const ErrorTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("export_table_csv: cannot open '" + path + "' for writing");
  out << "M,param,L2_percent,H1_percent\n";
  for (const ErrorRow& r : table.rows)
    out << r.basis_count << "," << format_param(r.param) << "," << format_fixed3(r.l2_percent)
        << "," << format_fixed3(r.h1_percent) << "\n";
  if (!out) throw ConfigError("export_table_csv: write failure on '" + path + "'");
}

/// Legacy ASCII VTK unstructured grid with a nodal pressure scalar and a
/// cell kappa scalar.
inline void export_field_vtk(const Vector& pressure_full, const PermeabilityField& kappa,
                             const FineMesh& mesh, const std::string& path) {
  require(static_cast<int>(pressure_full.size()) == mesh.n_vertices(),
          "export_field_vtk: pressure must be full-length");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("export_field_vtk: cannot open '" + path + "' for writing");

  char buf[80];
  out << "# vtk DataFile Version 3.0\n";
  out << "msexp pressure field\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const Point& p : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g 0\n", p.x, p.y);
    out << buf;
  }
  out << "CELLS " << mesh.n_cells() << " " << 4 * mesh.n_cells() << "\n";
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.n_cells() << "\n";
  for (int c = 0; c < mesh.n_cells(); ++c) out << "5\n";
  out << "POINT_DATA " << mesh.n_vertices() << "\n";
  out << "SCALARS pressure double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (double v : pressure_full) {
    std::snprintf(buf, sizeof buf, "%.9g\n", v);
    out << buf;
  }
  out << "CELL_DATA " << mesh.n_cells() << "\n";
  out << "SCALARS kappa double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (double v : kappa.cell_values) {
    std::snprintf(buf, sizeof buf, "%.9g\n", v);
    out << buf;
  }
  if (!out) throw ConfigError("export_field_vtk: write failure on '" + path + "'");
}

inline void export_cloud_csv(const PointCloud& cloud, const Vector& radii,
                             const std::string& path) {
  require(radii.size() == cloud.points.size(), "export_cloud_csv: radii mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("export_cloud_csv: cannot open '" + path + "' for writing");
  out << "x,y,r\n";
  char buf[120];
  for (int i = 0; i < cloud.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", cloud.points[i].x, cloud.points[i].y,
                  radii[i]);
    out << buf;
  }
  if (!out) throw ConfigError("export_cloud_csv: write failure on '" + path + "'");
}

inline void export_diag_json(const CoverReport& report, const std::string& path) {
  nlohmann::ordered_json j;
  j["C_ov"] = report.c_ov;
  j["delta"] = report.delta;
  j["lambda_max_overlap"] = report.lambda_max_overlap;
  j["covered"] = report.covered;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("export_diag_json: cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw ConfigError("export_diag_json: write failure on '" + path + "'");
}

}  // namespace msexp
