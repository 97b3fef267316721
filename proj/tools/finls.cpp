// finls: ground states, trajectories and property checks for the fractional
// inhomogeneous NLS.

#include <CLI11.hpp>

#include <iostream>

#include "finls/error.hpp"
#include "finls/harness/commands.hpp"
#include "finls/harness/config.hpp"

int main(int argc, char** argv) {
  using namespace finls::harness;
  CLI::App app{"Fractional inhomogeneous NLS solver and experiment harness"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  bool resume = false;
  int abort_after = 0;

  for (const char* name : {"ground", "evolve", "dichotomy", "sweep", "verify", "linear"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides config and FINLS_OUTPUT_DIR)");
    sub->add_option("--workers", workers, "Sweep worker threads (overrides config and FINLS_WORKERS)")
        ->check(CLI::Range(1, 1024));
    sub->add_flag("--resume", resume, "Continue a sweep from its journal");
    sub->add_option("--abort-after", abort_after)->group("");  // crash injection for resume tests
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kSuccess : kValidation;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  ExperimentConfig config;
  try {
    config = load_config(config_path);
    apply_environment(config);
  } catch (const finls::ValidationError& e) {
    std::cerr << "error[validation_error]: " << e.what() << '\n';
    return kValidation;
  }
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (workers > 0) config.workers = workers;

  return run_command(command, config, std::cerr, {resume, abort_after});
}
