#pragma once

#include <string>
#include <vector>

#include "spinorbit/config.hpp"
#include "spinorbit/csv.hpp"

namespace spinorbit {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNotCertified = 2, kExitValidation = 3 };

/// Square grid of points^2 momenta over [-p_max, p_max]^2 (the single point
/// p = 0 when points = 1). Columns px,py,lambda_minus,lambda_plus.
CsvTable dispersion_table(const Coupling& coupling, double p_max, int points);
CsvTable emit_dispersion_table(const Coupling& coupling, double p_max, int points, const std::string& path);

struct RunResult {
  Json report;
  int exit_code = kExitOk;
  std::vector<std::string> files;  // written, relative to the output directory
};

/// Runs dispersion -> extrema -> certify -> bounds -> solve -> validate up to
/// config.task, writing report.json and CSV tables into config.output_dir.
/// Exit code: 3 if validation failed, else 2 if the definiteness certificate
/// is not NegativeDefinite, else 0. Library errors propagate.
RunResult run(const RunConfig& config, unsigned threads = 1);

/// SPINORBIT_THREADS (0 or unset = hardware concurrency).
unsigned threads_from_env();

}  // namespace spinorbit
