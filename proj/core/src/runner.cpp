#include "convoy/runner.hpp"

#include <atomic>
#include <fstream>
#include <thread>

#include "convoy/csv.hpp"
#include "convoy/traffic.hpp"
#include "convoy/version.hpp"

namespace convoy {

namespace fs = std::filesystem;

RunResult run_scenario(const ScenarioConfig& config,
                       const fs::path& out_dir, std::optional<int> figure) {
  RunResult result;
  try {
    validate(config);
    fs::create_directories(out_dir);

    {
      std::ofstream manifest(out_dir / "manifest.cfg", std::ios::binary);
      manifest << "# convoy " << kVersion << "\n"
               << "# re-run with: convoy run --config manifest.cfg\n"
               << serialize_config(config);
    }

    Simulation sim(config);
    sim.run();
    result.cacc_gap_violations = sim.ledger().cacc_gap_violations();

    write_vehicles_csv((out_dir / "vehicles.csv").string(), sim.ledger());
    write_formation_csv((out_dir / "formation.csv").string(), sim.ledger());
    std::vector<SummaryRow> rows;
    if (auto row = aggregate(sim.ledger(), config)) {
      rows.push_back(*row);
      result.summary = *row;
    }
    write_summary_csv((out_dir / "summary.csv").string(), rows);
    if (figure) {
      write_summary_csv(
          (out_dir / ("figure" + std::to_string(*figure) + ".csv")).string(),
          rows, figure);
    }
  } catch (const ConfigError& e) {
    result.exit_code = kExitConfigError;
    result.error = e.what();
  } catch (const InvariantViolation& e) {
    result.exit_code = kExitInvariantViolation;
    result.error = e.what();
  }
  return result;
}

std::vector<RunPlan> expand_sweep(const SweepSpec& spec,
                                  const ScenarioConfig& base) {
  std::vector<RunPlan> plans;
  const std::vector<double> single_window = {base.formation.speed_window};
  for (const Approach approach : spec.approaches) {
    const auto& windows =
        is_platooning(approach) ? spec.speed_windows : single_window;
    for (const double window : windows) {
      for (const double density : spec.densities) {
        for (int rep = 0; rep < spec.repetitions; ++rep) {
          RunPlan plan;
          plan.config = base;
          plan.config.approach = approach;
          plan.config.formation.speed_window = window;
          plan.config.target_density = density;
          std::string id = to_string(approach);
          if (is_platooning(approach)) id += "_m" + csv_format(window);
          id += "_d" + csv_format(density) + "_r" + std::to_string(rep);
          plan.config.seed = mix_seed(spec.base_seed, id);
          plan.run_id = id;
          plans.push_back(std::move(plan));
        }
      }
    }
  }
  return plans;
}

int run_sweep(const SweepSpec& spec, const ScenarioConfig& base,
              const fs::path& out_dir, int jobs, std::optional<int> figure) {
  const std::vector<RunPlan> plans = expand_sweep(spec, base);
  std::vector<RunResult> results(plans.size());
  if (plans.empty()) {
    fs::create_directories(out_dir);
    write_summary_csv((out_dir / "summary.csv").string(), {});
    return kExitOk;
  }

  if (jobs <= 0) {
    jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;
  }
  jobs = std::min<int>(jobs, static_cast<int>(plans.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < plans.size();
         i = next.fetch_add(1)) {
      results[i] =
          run_scenario(plans[i].config, out_dir / plans[i].run_id, figure);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<SummaryRow> merged;
  int exit_code = kExitOk;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (results[i].summary) merged.push_back(*results[i].summary);
    if (results[i].exit_code != kExitOk) {
      exit_code = std::max(exit_code, results[i].exit_code);
      std::fprintf(stderr, "run %s failed (%d): %s\n",
                   plans[i].run_id.c_str(), results[i].exit_code,
                   results[i].error.c_str());
    }
  }
  fs::create_directories(out_dir);
  write_summary_csv((out_dir / "summary.csv").string(), merged);
  if (figure) {
    write_summary_csv(
        (out_dir / ("figure" + std::to_string(*figure) + ".csv")).string(),
        merged, figure);
  }
  return exit_code;
}

}  // namespace convoy
