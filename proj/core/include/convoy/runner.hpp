#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "convoy/config.hpp"
#include "convoy/metrics.hpp"

namespace convoy {

// Exit codes shared by the library runners and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitInvariantViolation = 3;

struct RunResult {
  int exit_code = kExitOk;
  std::optional<SummaryRow> summary;
  std::string error;
  // Health counter: settled platoon followers observed outside the
  // constant-spacing tolerance. Zero on a correct run.
  long cacc_gap_violations = 0;
};

/// Executes one run: pre-fill, warm-up, main phase; writes vehicles.csv,
/// formation.csv, summary.csv and manifest.cfg into `out_dir`. When `figure`
/// is given, additionally writes figure<N>.csv with that figure's columns.
RunResult run_scenario(const ScenarioConfig& config,
                       const std::filesystem::path& out_dir,
                       std::optional<int> figure = std::nullopt);

struct SweepSpec {
  std::vector<Approach> approaches;
  std::vector<double> speed_windows;  // only varied by platooning approaches
  std::vector<double> densities;
  int repetitions = 1;
  std::uint64_t base_seed = 1;
};

struct RunPlan {
  ScenarioConfig config;
  std::string run_id;
};

/// Cartesian expansion of a sweep; non-platooning approaches do not vary the
/// speed window. Every run's seed derives from (base seed, run id), so each
/// run is independently reproducible.
std::vector<RunPlan> expand_sweep(const SweepSpec& spec,
                                  const ScenarioConfig& base);

/// Runs all plans on a small worker pool, one output directory per run, and
/// merges the run summaries into <out_dir>/summary.csv (sorted by plan
/// order, independent of scheduling). Any failed run makes the exit code
/// nonzero; completed results are preserved.
int run_sweep(const SweepSpec& spec, const ScenarioConfig& base,
              const std::filesystem::path& out_dir, int jobs,
              std::optional<int> figure = std::nullopt);

}  // namespace convoy
