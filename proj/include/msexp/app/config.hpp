#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "msexp/common.hpp"

namespace msexp {

enum class ModelKind { linear, semilinear };

inline std::string to_string(ModelKind m) {
  return m == ModelKind::linear ? "linear" : "semilinear";
}

/// Parameters of the synthetic channel/inclusion permeability generator.
struct GeneratorSpec {
  int n_horizontal = 2;
  int n_vertical = 2;
  int n_inclusions = 8;
  int thickness = 2;
  std::uint64_t seed = 1;

  bool operator==(const GeneratorSpec&) const = default;
};

struct ExperimentConfig {
  int nx = 100;
  int ny = 100;
  std::string kappa_file;  // empty: use the generator
  GeneratorSpec generator;
  double contrast = 1e4;
  int n_points = 121;
  std::uint64_t seed = 1;
  double beta = 0.01;
  std::vector<double> gammas{3.0};
  std::vector<int> basis_counts{5};     // the paper-style M list
  std::vector<int> step_counts{50};     // the N_t list
  double t_max = 0.2;
  ModelKind model = ModelKind::linear;
  int reference_steps = 30000;
  std::string output_dir = "out";
  int picard = 1;
  int cvt_max_iters = 200;

  std::string base_dir;  // directory of the config file; not serialized

  bool operator==(const ExperimentConfig& o) const {
    return nx == o.nx && ny == o.ny && kappa_file == o.kappa_file && generator == o.generator &&
           contrast == o.contrast && n_points == o.n_points && seed == o.seed && beta == o.beta &&
           gammas == o.gammas && basis_counts == o.basis_counts && step_counts == o.step_counts &&
           t_max == o.t_max && model == o.model && reference_steps == o.reference_steps &&
           output_dir == o.output_dir && picard == o.picard && cvt_max_iters == o.cvt_max_iters;
  }

  /// Path of the kappa raster resolved against the config location.
  std::string resolved_kappa_file() const {
    if (kappa_file.empty()) return {};
    std::filesystem::path p(kappa_file);
    if (p.is_absolute() || base_dir.empty()) return kappa_file;
    return (std::filesystem::path(base_dir) / p).string();
  }
};

namespace detail {

inline void check_known_keys(const nlohmann::json& j, const std::set<std::string>& known,
                             const std::string& scope) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("config: unknown key '" + scope + it.key() + "'");
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config: key '" + key + "' has the wrong type");
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j, const std::string& base_dir = {}) {
  detail::check_known_keys(
      j,
      {"mesh", "permeability", "contrast", "n_points", "seed", "beta", "gamma", "M", "N_t",
       "t_max", "model", "reference_N_t", "output_dir", "picard", "cvt_max_iters"},
      "");

  ExperimentConfig c;
  c.base_dir = base_dir;

  if (!j.contains("mesh")) throw ConfigError("config: missing key 'mesh'");
  detail::check_known_keys(j.at("mesh"), {"nx", "ny"}, "mesh.");
  c.nx = detail::get_or(j.at("mesh"), "nx", 0);
  c.ny = detail::get_or(j.at("mesh"), "ny", 0);
  if (c.nx < 1 || c.ny < 1) throw ConfigError("config: mesh.nx and mesh.ny must be >= 1");

  if (!j.contains("n_points")) throw ConfigError("config: missing key 'n_points'");
  c.n_points = j.at("n_points").get<int>();
  if (c.n_points < 1) throw ConfigError("config: n_points must be >= 1");

  if (j.contains("permeability")) {
    const auto& p = j.at("permeability");
    detail::check_known_keys(p, {"file", "generator"}, "permeability.");
    if (p.contains("file") == p.contains("generator"))
      throw ConfigError("config: permeability needs exactly one of 'file' or 'generator'");
    if (p.contains("file")) {
      c.kappa_file = p.at("file").get<std::string>();
    } else {
      const auto& g = p.at("generator");
      detail::check_known_keys(
          g, {"n_horizontal", "n_vertical", "n_inclusions", "thickness", "seed"},
          "permeability.generator.");
      c.generator.n_horizontal = detail::get_or(g, "n_horizontal", c.generator.n_horizontal);
      c.generator.n_vertical = detail::get_or(g, "n_vertical", c.generator.n_vertical);
      c.generator.n_inclusions = detail::get_or(g, "n_inclusions", c.generator.n_inclusions);
      c.generator.thickness = detail::get_or(g, "thickness", c.generator.thickness);
      c.generator.seed = detail::get_or(g, "seed", c.generator.seed);
    }
  }

  c.contrast = detail::get_or(j, "contrast", c.contrast);
  if (c.contrast < 1.0) throw ConfigError("config: contrast must be >= 1");
  c.seed = detail::get_or(j, "seed", c.seed);
  c.beta = detail::get_or(j, "beta", c.beta);
  if (c.beta < 0.0) throw ConfigError("config: beta must be >= 0");

  c.gammas = detail::get_or(j, "gamma", c.gammas);
  if (c.gammas.empty()) throw ConfigError("config: gamma list must be nonempty");
  for (double g : c.gammas)
    if (!(g > 1.0)) throw ConfigError("config: gamma must be > 1 for complete coverage");

  c.basis_counts = detail::get_or(j, "M", c.basis_counts);
  if (c.basis_counts.empty()) throw ConfigError("config: M list must be nonempty");
  for (int m : c.basis_counts)
    if (m < 1) throw ConfigError("config: M entries must be >= 1");

  c.step_counts = detail::get_or(j, "N_t", c.step_counts);
  if (c.step_counts.empty()) throw ConfigError("config: N_t list must be nonempty");
  for (int n : c.step_counts)
    if (n < 1) throw ConfigError("config: N_t entries must be >= 1");

  c.t_max = detail::get_or(j, "t_max", c.t_max);
  if (!(c.t_max > 0.0)) throw ConfigError("config: t_max must be > 0");

  const std::string model = detail::get_or<std::string>(j, "model", "linear");
  if (model == "linear")
    c.model = ModelKind::linear;
  else if (model == "semilinear")
    c.model = ModelKind::semilinear;
  else
    throw ConfigError("config: model must be 'linear' or 'semilinear'");

  c.reference_steps = detail::get_or(j, "reference_N_t", c.reference_steps);
  if (c.reference_steps < 1) throw ConfigError("config: reference_N_t must be >= 1");
  c.output_dir = detail::get_or<std::string>(j, "output_dir", c.output_dir);
  c.picard = detail::get_or(j, "picard", c.picard);
  if (c.picard < 1) throw ConfigError("config: picard must be >= 1");
  c.cvt_max_iters = detail::get_or(j, "cvt_max_iters", c.cvt_max_iters);
  if (c.cvt_max_iters < 1) throw ConfigError("config: cvt_max_iters must be >= 1");
  return c;
}

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["mesh"] = {{"nx", c.nx}, {"ny", c.ny}};
  if (!c.kappa_file.empty()) {
    j["permeability"] = {{"file", c.kappa_file}};
  } else {
    j["permeability"] = {{"generator",
                          {{"n_horizontal", c.generator.n_horizontal},
                           {"n_vertical", c.generator.n_vertical},
                           {"n_inclusions", c.generator.n_inclusions},
                           {"thickness", c.generator.thickness},
                           {"seed", c.generator.seed}}}};
  }
  j["contrast"] = c.contrast;
  j["n_points"] = c.n_points;
  j["seed"] = c.seed;
  j["beta"] = c.beta;
  j["gamma"] = c.gammas;
  j["M"] = c.basis_counts;
  j["N_t"] = c.step_counts;
  j["t_max"] = c.t_max;
  j["model"] = to_string(c.model);
  j["reference_N_t"] = c.reference_steps;
  j["output_dir"] = c.output_dir;
  j["picard"] = c.picard;
  j["cvt_max_iters"] = c.cvt_max_iters;
  return j;
}

inline std::string serialize_config(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: parse failure in '" + path + "': " + e.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path().string());
}

}  // namespace msexp
