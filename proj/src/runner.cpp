#include "spinorbit/runner.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "spinorbit/certifier.hpp"
#include "spinorbit/errors.hpp"
#include "spinorbit/oracle.hpp"
#include "spinorbit/report.hpp"
#include "spinorbit/variational.hpp"

namespace spinorbit {

namespace {

bool reaches(Task task, Task stage) { return static_cast<int>(task) >= static_cast<int>(stage); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

CsvTable matrix_table(const VariationalMatrices& m) {
  CsvTable t;
  t.header = {"m", "n", "K_re", "K_im", "W_re", "W_im", "G_re", "G_im"};
  for (Eigen::Index i = 0; i < m.G.rows(); ++i)
    for (Eigen::Index j = 0; j < m.G.cols(); ++j)
      t.rows.push_back({double(i + 1), double(j + 1), m.K(i, j).real(), m.K(i, j).imag(), m.W(i, j).real(),
                        m.W(i, j).imag(), m.G(i, j).real(), m.G(i, j).imag()});
  return t;
}

}  // namespace

CsvTable dispersion_table(const Coupling& coupling, double p_max, int points) {
  CsvTable t;
  t.header = {"px", "py", "lambda_minus", "lambda_plus"};
  t.rows.reserve(static_cast<std::size_t>(points) * points);
  const double step = points > 1 ? 2.0 * p_max / (points - 1) : 0.0;
  for (int j = 0; j < points; ++j)
    for (int i = 0; i < points; ++i) {
      const Vec2 p = points > 1 ? Vec2{-p_max + i * step, -p_max + j * step} : Vec2{};
      const auto d = dispersion(coupling, p);
      t.rows.push_back({p.x, p.y, d.lambda_minus, d.lambda_plus});
    }
  return t;
}

CsvTable emit_dispersion_table(const Coupling& coupling, double p_max, int points, const std::string& path) {
  CsvTable t = dispersion_table(coupling, p_max, points);
  write_csv(path, t);
  return t;
}

unsigned threads_from_env() {
  const char* env = std::getenv("SPINORBIT_THREADS");
  unsigned n = 0;
  if (env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0) throw Error(ErrorKind::Config, "SPINORBIT_THREADS must be a non-negative integer");
    n = static_cast<unsigned>(v);
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

RunResult run(const RunConfig& config, unsigned threads) {
  namespace fs = std::filesystem;
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + dir.string() + ": " + ec.message());

  RunResult out;
  Json& report = out.report;
  report["program"] = "spinorbit-bound";
  report["version"] = kVersion;
  report["config"] = to_json(config);

  const Coupling coupling = make_coupling(config);
  const Potential potential = make_potential(config);
  auto emit = [&](const std::string& name, const CsvTable& table) {
    write_csv((dir / name).string(), table);
    out.files.push_back(name);
  };

  // dispersion
  {
    const CsvTable t = dispersion_table(coupling, config.dispersion.p_max, config.dispersion.points);
    emit("dispersion.csv", t);
    double lo = t.rows.front()[2];
    for (const auto& r : t.rows) lo = std::min(lo, r[2]);
    report["dispersion"] = {{"table", "dispersion.csv"}, {"rows", t.rows.size()}, {"min_lambda_minus", lo}};
  }

  bool certified = true;
  bool validated = true;
  if (reaches(config.task, Task::Extrema)) {
    const ExtremumSet extrema = find_kappa_and_S(coupling, make_search_config(config, threads));
    report["extrema"] = to_json(extrema);
    CsvTable s_points;
    s_points.header = {"px", "py", "lambda_minus"};
    for (const auto& p : extrema.points) s_points.rows.push_back({p.x, p.y, lambda_minus(coupling, p)});
    emit("extrema.csv", s_points);
    report["extrema"]["table"] = "extrema.csv";

    if (reaches(config.task, Task::Certify)) {
      PredictConfig pc;
      pc.angle_offset = config.certify.angle_offset;
      pc.certify.tol_def_rel = config.certify.tol_def_rel;
      const CountPrediction prediction = predicted_count(extrema, potential, config.certify.n_max, pc);
      report["certify"] = to_json(prediction);
      certified = prediction.certificate.verdict == Verdict::NegativeDefinite;
      CsvTable cm;
      cm.header = {"m", "n", "re", "im"};
      const auto& m = prediction.certificate.matrix;
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) cm.rows.push_back({double(i + 1), double(j + 1), m(i, j).real(), m(i, j).imag()});
      emit("certificate_matrix.csv", cm);
    }

    std::optional<SweepResult> sweep;
    if (reaches(config.task, Task::Bounds)) {
      AssemblyConfig ac;
      ac.cond_max = config.variational.cond_max;
      ac.threads = threads;
      FamilyConfig fc;
      fc.sep_min_rel = config.variational.sep_min_rel;
      const auto anchors = place_anchors(extrema, config.variational.anchors, config.variational.angle_offset);
      sweep = sweep_exponent(coupling, extrema, potential, anchors, config.variational.a_grid, ac, fc);
      report["bounds"] = to_json(*sweep);
      const auto family = make_family(coupling, extrema, sweep->best.anchors, sweep->best.a_used, fc);
      emit("matrices.csv", matrix_table(assemble_matrices(coupling, extrema, potential, family, ac)));
      CsvTable ev;
      ev.header = {"n", "mu", "nu"};
      for (std::size_t k = 0; k < sweep->best.nu.size(); ++k)
        ev.rows.push_back({double(k + 1), sweep->best.mu[k], sweep->best.nu[k]});
      emit("bounds.csv", ev);
    }

    if (reaches(config.task, Task::Solve)) {
      DiscretizationConfig dc;
      const auto& o = config.oracle;
      dc.box_width = o.box_width;
      dc.grid_points = o.grid_points;
      dc.resid_tol = o.resid_tol;
      dc.margin = o.margin;
      dc.doubling_check = o.doubling_check;
      dc.drift_tol = o.drift_tol;
      dc.initial_count = o.initial_count;
      dc.max_count = o.max_count;
      if (sweep) dc.initial_count = std::max(dc.initial_count, std::min(dc.max_count, sweep->best.certified_count + 4));
      const OracleSpectrum spectrum = solve_oracle(coupling, potential, extrema.kappa, dc);
      report["oracle"] = to_json(spectrum);
      CsvTable ev;
      ev.header = {"n", "E", "E_minus_kappa_h", "residual"};
      for (std::size_t k = 0; k < spectrum.eigenvalues.size(); ++k)
        ev.rows.push_back({double(k + 1), spectrum.eigenvalues[k], spectrum.eigenvalues[k] - spectrum.kappa_h,
                           spectrum.residuals[k]});
      emit("oracle.csv", ev);

      if (config.task == Task::Full && sweep) {
        const BoundValidation v = validate_bounds(spectrum, sweep->best, o.tol_oracle);
        report["validation"] = to_json(v);
        validated = v.pass;
      }
    }
  }

  out.exit_code = !validated ? kExitValidation : (!certified ? kExitNotCertified : kExitOk);
  report["exit_code"] = out.exit_code;
  report["files"] = out.files;
  write_text(dir / "report.json", dump_json(report));
  out.files.push_back("report.json");
  return out;
}

}  // namespace spinorbit
