#pragma once

#include <array>
#include "json.hpp"
#include <string>
#include <vector>

#include "spinorbit/dispersion.hpp"
#include "spinorbit/potential.hpp"

namespace spinorbit {

using Json = nlohmann::ordered_json;

enum class Task { Dispersion, Extrema, Certify, Bounds, Solve, Full };
std::string to_string(Task task);
Task parse_task(const std::string& name);  // throws Config

struct CouplingConfig {
  std::string kind = "rashba";  // none | rashba | dresselhaus | mixed | tabulated
  double alpha = 1.0;           // rashba, dresselhaus
  double alpha_r = 1.0;         // mixed
  double alpha_d = 1.0;         // mixed
  std::string path;             // tabulated: CSV px,py,ReA,ImA
};

struct TermConfig {
  std::string shape = "gaussian";  // gaussian | circular
  double depth = 0.5;
  double radius = 1.0;
  std::array<double, 2> center{0.0, 0.0};
};

struct PotentialConfig {
  std::string kind = "gaussian";  // zero | gaussian | circular | sum | grid
  TermConfig term;                // gaussian, circular
  std::vector<TermConfig> terms;  // sum
  std::string path;               // grid: CSV x,y,V
  double scale = 1.0;             // grid
};

struct SearchSection {
  int angles = 720;
  int radii = 400;
  double tol_extremum_rel = 1e-9;
  double growth_margin = 0.1;
};

struct DispersionSection {
  double p_max = 2.0;  // square grid [-p_max, p_max]^2
  int points = 41;     // per axis
};

struct CertifySection {
  int n_max = 8;
  double tol_def_rel = 1e-12;
  double angle_offset = 0.0;
};

struct VariationalSection {
  int anchors = 4;
  std::vector<double> a_grid{2.0, 1.0, 0.5, 0.25};
  double cond_max = 1e8;
  double sep_min_rel = 0.05;
  double angle_offset = 0.0;
};

struct OracleSection {
  double box_width = 40.0;
  int grid_points = 256;
  double resid_tol = 1e-8;
  double margin = 2e-8;  // eigenvalues counted below kappa_h - margin
  bool doubling_check = true;
  double drift_tol = 1e-3;
  double tol_oracle = 1e-6;
  int initial_count = 8;
  int max_count = 64;
};

/// A fully-resolved run description; every field has a default.
struct RunConfig {
  std::string units = "natural";
  Task task = Task::Full;
  CouplingConfig coupling;
  PotentialConfig potential;
  SearchSection search;
  DispersionSection dispersion;
  CertifySection certify;
  VariationalSection variational;
  OracleSection oracle;
  std::string output_dir = "spinorbit-out";
  std::string base_dir = ".";  // relative data paths resolve against the config file
};

/// Parses and validates a JSON document. Unknown keys, wrong types and
/// out-of-range values throw Config naming the offending field.
RunConfig parse_config(const Json& doc, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);  // adds line/column to parse errors

/// The resolved configuration, defaults included (embedded in every report).
Json to_json(const RunConfig& config);

Coupling make_coupling(const RunConfig& config);
Potential make_potential(const RunConfig& config);
SearchConfig make_search_config(const RunConfig& config, unsigned threads);

}  // namespace spinorbit
