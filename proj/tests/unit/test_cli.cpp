#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "spinorbit/errors.hpp"
#include "spinorbit/report.hpp"
#include "spinorbit/runner.hpp"

using namespace spinorbit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spinorbit_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ErrorKind parse_error_kind(const std::string& text) {
  try {
    (void)parse_config(Json::parse(text));
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("config was accepted: " << text);
  return ErrorKind::Io;
}

std::string parse_error_message(const std::string& text) {
  try {
    (void)parse_config(Json::parse(text));
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(SPINORBIT_BOUND_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing rejects unknown keys and bad values with the field name") {
  CHECK(parse_error_kind(R"({"colour": 1})") == ErrorKind::Config);
  CHECK(parse_error_message(R"({"oracle": {"grid_points": 256, "gird": 1}})").find("oracle.gird") != std::string::npos);
  CHECK(parse_error_message(R"({"coupling": {"kind": "rashba", "alpha_r": 1}})").find("coupling.alpha_r") !=
        std::string::npos);
  CHECK(parse_error_message(R"({"potential": {"kind": "gaussian", "radius": -1}})").find("potential.radius") !=
        std::string::npos);
  CHECK(parse_error_message(R"({"variational": {"a_grid": [1, 2]}})").find("descending") != std::string::npos);
  CHECK(parse_error_message(R"({"oracle": {"grid_points": 32}})").find("oracle.grid_points") != std::string::npos);
  CHECK(parse_error_message(R"({"task": "everything"})").find("task") != std::string::npos);
  CHECK(parse_error_message(R"({"units": "si"})").find("units") != std::string::npos);
  CHECK(parse_error_message(R"({"oracle": {"box_width": "wide"}})").find("expected a number") != std::string::npos);
  CHECK(parse_error_message(R"({"potential": {"kind": "sum", "terms": [{"shape": "square"}]}})")
            .find("potential.terms[0].shape") != std::string::npos);
}

TEST_CASE("resolved config echo includes defaults and round-trips") {
  const RunConfig c = parse_config(Json::parse(R"({"coupling": {"kind": "mixed", "alpha_r": 2, "alpha_d": 0.5}})"));
  const Json echo = to_json(c);
  CHECK(echo["task"] == "full");
  CHECK(echo["oracle"]["grid_points"] == 256);
  CHECK(echo["variational"]["a_grid"].size() == 4);
  const RunConfig again = parse_config(Json::parse(dump_json(echo)));
  CHECK(dump_json(to_json(again)) == dump_json(echo));
}

TEST_CASE("json numbers use 17 significant digits and parse back exactly") {
  Json j;
  j["x"] = 0.1;
  j["third"] = 1.0 / 3.0;
  j["n"] = 3;
  j["bad"] = std::nan("");
  const std::string text = dump_json(j);
  CHECK(text.find("1.0000000000000001e-01") != std::string::npos);
  CHECK(text.find("\"bad\": null") != std::string::npos);
  const Json back = Json::parse(text);
  CHECK(back["third"].get<double>() == 1.0 / 3.0);
  CHECK(back["n"].get<int>() == 3);
}

TEST_CASE("dispersion tables") {
  const auto dir = scratch("dispersion");
  const auto free_table = emit_dispersion_table(Coupling::none(), 1.0, 3, (dir / "free.csv").string());
  REQUIRE(free_table.rows.size() == 9);
  for (const auto& r : free_table.rows) {
    CHECK(r[2] == r[0] * r[0] + r[1] * r[1]);
    CHECK(r[3] == r[2]);
  }
  const auto back = read_csv((dir / "free.csv").string());
  CHECK(back.header == free_table.header);
  CHECK(back.rows == free_table.rows);

  // (1, 0) is a node of the 5 x 5 grid over [-2, 2]^2 and lies on the circle 2p = alpha
  const auto rashba = dispersion_table(Coupling::rashba(2.0), 2.0, 5);
  double lo = 1e300;
  for (const auto& r : rashba.rows) lo = std::min(lo, r[2]);
  CHECK(lo == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pipeline: extrema report, certification exit code, determinism") {
  const auto dir = scratch("pipeline");
  RunConfig extrema = parse_config(Json::parse(
      R"({"task": "extrema", "coupling": {"kind": "rashba", "alpha": 2}, "potential": {"kind": "zero"}})"));
  extrema.output_dir = (dir / "extrema").string();
  const auto r = run(extrema, 1);
  CHECK(r.exit_code == kExitOk);
  CHECK(r.report["extrema"]["kappa"].get<double>() == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(r.report["extrema"]["shape"] == "Circle");
  CHECK(r.report["extrema"]["radius"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fs::exists(dir / "extrema" / "report.json"));
  CHECK(fs::exists(dir / "extrema" / "extrema.csv"));

  RunConfig zero = parse_config(Json::parse(R"({"task": "certify", "potential": {"kind": "zero"}})"));
  zero.output_dir = (dir / "zero_a").string();
  const auto z = run(zero, 1);
  CHECK(z.exit_code == kExitNotCertified);
  CHECK(z.report["certify"]["certificate"]["verdict"] != "NegativeDefinite");

  RunConfig again = zero;
  again.output_dir = (dir / "zero_b").string();
  (void)run(again, 4);
  std::string a = slurp(dir / "zero_a" / "report.json"), b = slurp(dir / "zero_b" / "report.json");
  // identical apart from the echoed output directory
  const auto strip = [](std::string s, const std::string& what) {
    for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what)) s.erase(pos, what.size());
    return s;
  };
  CHECK(strip(a, (dir / "zero_a").string()) == strip(b, (dir / "zero_b").string()));
  CHECK(slurp(dir / "zero_a" / "certificate_matrix.csv") == slurp(dir / "zero_b" / "certificate_matrix.csv"));
}

TEST_CASE("full pipeline on a small grid validates") {
  const auto dir = scratch("full");
  RunConfig c = parse_config(Json::parse(R"({"task": "full", "coupling": {"kind": "rashba", "alpha": 1},
      "potential": {"kind": "gaussian", "depth": 0.5, "radius": 1},
      "variational": {"a_grid": [1, 0.5]}, "oracle": {"grid_points": 128}})"));
  c.output_dir = dir.string();
  const auto r = run(c, 1);
  CHECK(r.exit_code == kExitOk);
  CHECK(r.report["validation"]["verdict"] == "pass");
  CHECK(r.report["bounds"]["best"]["certified_count"].get<int>() >= 1);
  for (const char* f : {"dispersion.csv", "extrema.csv", "certificate_matrix.csv", "matrices.csv", "bounds.csv",
                        "oracle.csv", "report.json"})
    CHECK(fs::exists(dir / f));
}

TEST_CASE("command line exit codes") {
  const auto dir = scratch("binary");
  CHECK(run_binary("--version") == 0);
  CHECK(run_binary("run") == kExitConfig);
  {
    std::ofstream(dir / "bad.json") << R"({"coupling": {"kind": "rashba", "alpha": 1, "extra": 2}})";
  }
  CHECK(run_binary("run --config " + (dir / "bad.json").string()) == kExitConfig);
  {
    std::ofstream(dir / "zero.json") << R"({"task": "extrema", "potential": {"kind": "zero"}})";
  }
  CHECK(run_binary("run --config " + (dir / "zero.json").string() + " --validate-config") == 0);
  CHECK(run_binary("run --config " + (dir / "zero.json").string() + " --task certify --out " + (dir / "o").string()) ==
        kExitNotCertified);
  CHECK(fs::exists(dir / "o" / "report.json"));
}
