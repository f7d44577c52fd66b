#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "spinorbit/errors.hpp"
#include "spinorbit/report.hpp"
#include "spinorbit/runner.hpp"

using namespace spinorbit;

namespace {

constexpr int kExitRuntime = 4;  // a library failure other than configuration

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational and direct bounds on bound states below the threshold of spin-orbit Hamiltonians",
               "spinorbit-bound"};
  app.set_version_flag("--version", std::string("spinorbit-bound ") + kVersion);
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run the pipeline described by a JSON config");
  std::string config_path, task, out_dir;
  bool validate_only = false;
  run_cmd->add_option("--config", config_path, "JSON run configuration")->required();
  run_cmd->add_option("--task", task, "dispersion|extrema|certify|bounds|solve|full (overrides the config)");
  run_cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");
  run_cmd->add_flag("--validate-config", validate_only, "parse and validate the config, print it resolved, exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  RunConfig config;
  try {
    config = load_config(config_path);
    if (!task.empty()) config.task = parse_task(task);
    if (!out_dir.empty()) config.output_dir = out_dir;
  } catch (const Error& e) {
    std::cerr << "spinorbit-bound: " << e.what() << "\n";
    return kExitConfig;
  }
  if (validate_only) {
    std::cout << dump_json(to_json(config));
    return kExitOk;
  }

  try {
    const RunResult result = run(config, threads_from_env());
    std::cerr << "spinorbit-bound: wrote " << result.files.size() << " file(s) to " << config.output_dir
              << ", exit " << result.exit_code << "\n";
    return result.exit_code;
  } catch (const Error& e) {
    std::cerr << "spinorbit-bound: " << e.what() << "\n";
    return e.kind() == ErrorKind::Config || e.kind() == ErrorKind::Io ? kExitConfig : kExitRuntime;
  }
}
