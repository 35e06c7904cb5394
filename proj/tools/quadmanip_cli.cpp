#include <iostream>

#include <CLI11.hpp>

#include "quadmanip/cli/commands.hpp"

namespace qm = quadmanip;
namespace cli = quadmanip::cli;

namespace {

// Optional flag helpers: CLI11 leaves std::optional empty when not given.
template <typename T>
void flag(CLI::App* app, const std::string& name, std::optional<T>& dst, const std::string& help) {
  app->add_option(name, dst, help);
}

cli::RunConfig base_config(const std::string& path) {
  return path.empty() ? cli::RunConfig{} : cli::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadruped mobile-manipulation planning and evaluation harness"};
  app.require_subcommand(1);

  // run
  cli::RunOverrides ov;
  std::string run_config;
  auto* run = app.add_subcommand("run", "Run scenario bundles or suites and write traces plus an aggregate report");
  run->add_option("scenarios", ov.scenarios, "Bundle directories, scenario files or suite directories");
  run->add_option("--config", run_config, "Config file; flags override its values")->check(CLI::ExistingFile);
  flag(run, "--seed", ov.seed, "Master seed");
  flag(run, "--episodes", ov.episodes, "Episodes per scenario");
  flag(run, "--dt", ov.dt, "Control tick in seconds");
  flag(run, "--jobs", ov.jobs, "Parallel episode workers");
  flag(run, "--preset", ov.preset, "Command-range preset used to clamp controller output (train, eval)");
  flag(run, "--out", ov.out, "Output directory");
  flag(run, "--grounding", ov.grounding, "Grounding fixture file name inside each bundle");
  flag(run, "--tau-base", ov.tau_base, "Base velocity lag time constant (s)");
  flag(run, "--ee-rate", ov.ee_rate, "End-effector convergence rate (1/s)");
  flag(run, "--sigma-pos", ov.sigma_pos, "End-effector position noise (m)");
  flag(run, "--sigma-ori", ov.sigma_ori, "End-effector orientation noise (rad)");

  // rewards
  std::string timeline, rewards_config, rewards_out;
  auto* rewards = app.add_subcommand("rewards", "Evaluate every reward term on a recorded timeline CSV");
  rewards->add_option("timeline", timeline, "Timeline CSV")->required();
  rewards->add_option("--config", rewards_config, "Config file with reward weights")->check(CLI::ExistingFile);
  rewards->add_option("--out", rewards_out, "Output CSV (default: stdout)");

  // validate
  std::vector<std::string> validate_paths;
  std::string validate_config, validate_grounding = "grounding.yaml";
  auto* validate = app.add_subcommand("validate", "Check scenario bundles, scenario files and config files");
  validate->add_option("paths", validate_paths, "Bundle directories or scenario files");
  validate->add_option("--config", validate_config, "Config file to check as well");
  validate->add_option("--grounding", validate_grounding, "Grounding fixture file name inside each bundle");

  // export-grid
  std::string grid_path, grid_out, grid_config;
  auto* grid = app.add_subcommand("export-grid", "Write the start-pose occupancy map as PGM plus a YAML sidecar");
  grid->add_option("scenario", grid_path, "Bundle directory or scenario file")->required();
  grid->add_option("--out", grid_out, "Output stem; writes <stem>.pgm and <stem>.yaml")->required();
  grid->add_option("--config", grid_config, "Config file (sim section)")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cli::kOk : cli::kUsage;
  }

  try {
    if (*run) {
      cli::RunConfig cfg = base_config(run_config);
      cli::apply(cfg, ov);
      cli::cmd_run(cfg, std::cout);
    } else if (*rewards) {
      const std::string csv = cli::cmd_rewards(timeline, base_config(rewards_config).control);
      if (rewards_out.empty())
        std::cout << csv;
      else
        cli::write_text(rewards_out, csv);
    } else if (*validate) {
      if (validate_paths.empty() && validate_config.empty()) throw qm::UsageError("nothing to validate");
      if (!validate_config.empty()) {
        if (!std::filesystem::exists(validate_config)) throw qm::IoError("path not found: " + validate_config);
        cli::load_config(validate_config);
        std::cout << "ok: config '" << validate_config << "'\n";
      }
      for (const std::string& p : validate_paths) std::cout << cli::cmd_validate(p, validate_grounding) << "\n";
    } else if (*grid) {
      const auto g = cli::cmd_export_grid(grid_path, grid_out, base_config(grid_config).sim);
      std::cout << fmt::format("wrote {}.pgm ({}x{} cells)\n", grid_out, g.width(), g.height());
    }
  } catch (...) {
    return cli::report_error(std::cerr);
  }
  return cli::kOk;
}
