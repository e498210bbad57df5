// Command-line front end: single runs and parameter sweeps over the
// formation approaches, emitting tidy CSVs per run.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "convoy/runner.hpp"
#include "convoy/version.hpp"

namespace {

std::string default_out_dir() {
  if (const char* env = std::getenv("CONVOY_OUT_DIR")) return env;
  return "out";
}

convoy::ScenarioConfig load_base_config(const std::string& config_path) {
  if (config_path.empty()) {
    convoy::ScenarioConfig config;
    convoy::validate(config);
    return config;
  }
  return convoy::parse_config_file(config_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convoy - freeway platooning simulator and "
               "vehicle-to-platoon assignment engine"};
  app.set_version_flag("--version", std::string(convoy::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = default_out_dir();
  std::optional<int> figure;

  // ---- run ----
  auto* run = app.add_subcommand("run", "Execute a single simulation run");
  std::string approach, speed_window, density, seed, trace_file;
  run->add_option("--config", config_path, "Config file (key=value lines)");
  run->add_option("--approach", approach,
                  "human|acc|distributed_greedy|centralized_greedy|"
                  "centralized_solver");
  run->add_option("--density", density, "Target density (veh per lane-km)");
  run->add_option("--speed-window", speed_window,
                  "Allowed relative speed deviation m");
  run->add_option("--seed", seed, "Run seed");
  run->add_option("--trace-file", trace_file, "Per-step trace CSV (off by default)");
  run->add_option("--out-dir", out_dir, "Output directory");
  run->add_option("--figure", figure, "Also emit figure<N>.csv (N in 3..13)");

  // ---- sweep ----
  auto* sweep = app.add_subcommand(
      "sweep", "Run the cartesian product of approaches x windows x "
               "densities x repetitions");
  std::vector<std::string> approaches;
  std::vector<double> windows, densities;
  int repetitions = 1;
  int jobs = 0;
  std::uint64_t base_seed = 1;
  sweep->add_option("--config", config_path, "Base config file");
  sweep->add_option("--approaches", approaches, "Approaches to sweep")
      ->delimiter(',')
      ->required();
  sweep->add_option("--speed-windows", windows,
                    "Speed windows (platooning approaches only)")
      ->delimiter(',');
  sweep->add_option("--densities", densities, "Target densities")
      ->delimiter(',')
      ->required();
  sweep->add_option("--repetitions", repetitions, "Repetitions per cell");
  sweep->add_option("--jobs", jobs, "Parallel runs (0 = all cores)");
  sweep->add_option("--base-seed", base_seed,
                    "Base seed; each run's seed is derived from it");
  sweep->add_option("--out-dir", out_dir, "Output directory");
  sweep->add_option("--figure", figure, "Also emit figure<N>.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    convoy::ScenarioConfig base = load_base_config(config_path);

    if (run->parsed()) {
      if (!approach.empty())
        convoy::apply_override(base, "approach", approach);
      if (!density.empty())
        convoy::apply_override(base, "target_density", density);
      if (!speed_window.empty())
        convoy::apply_override(base, "speed_window", speed_window);
      if (!seed.empty()) convoy::apply_override(base, "seed", seed);
      if (!trace_file.empty())
        convoy::apply_override(base, "trace_file", trace_file);
      convoy::validate(base);

      const convoy::RunResult result =
          convoy::run_scenario(base, out_dir, figure);
      if (result.exit_code != convoy::kExitOk) {
        std::cerr << "error: " << result.error << "\n";
      }
      return result.exit_code;
    }

    convoy::SweepSpec spec;
    for (const auto& name : approaches) {
      spec.approaches.push_back(convoy::parse_approach(name));
    }
    spec.speed_windows =
        windows.empty() ? std::vector<double>{base.formation.speed_window}
                        : windows;
    spec.densities = densities;
    spec.repetitions = repetitions;
    spec.base_seed = base_seed;
    return convoy::run_sweep(spec, base, out_dir, jobs, figure);
  } catch (const convoy::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return convoy::kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return convoy::kExitConfigError;
  } catch (const convoy::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return convoy::kExitInvariantViolation;
  }
}
