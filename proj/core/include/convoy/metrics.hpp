#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "convoy/types.hpp"

namespace convoy {

/// One completed, non-warm-up trip.
struct VehicleTripRecord {
  VehicleId id = kNoVehicle;
  double desired_speed = 0.0;
  double depart_time = 0.0;
  double arrival_time = 0.0;
  double expected_travel_time = 0.0;  // trip_length / desired_speed
  double real_travel_time = 0.0;
  std::optional<double> time_to_platoon;
  double time_in_platoon = 0.0;
  double distance = 0.0;
  double fuel_liters = 0.0;
  double mean_speed = 0.0;
  double mean_speed_deviation_ratio = 0.0;      // signed, time-averaged
  double mean_abs_speed_deviation_ratio = 0.0;  // time-averaged magnitude
};

/// One execution of a formation algorithm (a global round for the
/// centralized strategies, a single vehicle's scan for the distributed one).
struct FormationExecutionRecord {
  double time = 0.0;
  Approach strategy = Approach::Human;
  int n_searchers = 0;
  long candidates_found = 0;
  long candidates_filtered = 0;
  int joins_triggered = 0;
  double objective_full = 0.0;
  double objective_paper_convention = 0.0;
  double solve_time = 0.0;
  double gap = 0.0;
};

/// Periodic road-state sample.
struct WorldSample {
  double time = 0.0;
  double density = 0.0;  // vehicles per lane-km
  double departure_flow_vph = 0.0;
  double detector_flow_vph = 0.0;  // crossings of the mid-road detector
  double mean_speed = 0.0;
  long vehicle_count = 0;
  std::map<int, long> platoon_size_hist;  // size -> vehicles driving at it
};

/// Running mean/stddev.
class Welford {
 public:
  void add(double x);
  long count() const { return n_; }
  double mean() const { return n_ ? mean_ : 0.0; }
  double stddev() const;

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Append-only record store behind every reported statistic. Warm-up
/// exclusion is the writer's job: the simulation only records trips of
/// vehicles that departed after the warm-up and only samples past it.
class MetricsLedger {
 public:
  void add_trip(VehicleTripRecord r) { trips_.push_back(std::move(r)); }
  void add_execution(FormationExecutionRecord r) {
    executions_.push_back(std::move(r));
  }
  void add_sample(WorldSample s) { samples_.push_back(std::move(s)); }
  void add_scan(long found, long filtered) {
    found_per_scan_.add(static_cast<double>(found));
    filtered_per_scan_.add(static_cast<double>(filtered));
  }
  void note_cacc_gap_violation() { ++cacc_gap_violations_; }

  const std::vector<VehicleTripRecord>& trips() const { return trips_; }
  const std::vector<FormationExecutionRecord>& executions() const {
    return executions_;
  }
  const std::vector<WorldSample>& samples() const { return samples_; }
  const Welford& found_per_scan() const { return found_per_scan_; }
  const Welford& filtered_per_scan() const { return filtered_per_scan_; }
  long cacc_gap_violations() const { return cacc_gap_violations_; }

  bool empty() const {
    return trips_.empty() && executions_.empty() && samples_.empty();
  }

 private:
  std::vector<VehicleTripRecord> trips_;
  std::vector<FormationExecutionRecord> executions_;
  std::vector<WorldSample> samples_;
  Welford found_per_scan_;
  Welford filtered_per_scan_;
  long cacc_gap_violations_ = 0;
};

/// (current - desired) / desired; negative means slower than desired.
double speed_deviation_ratio(double current_speed, double desired_speed);

/// real / expected; > 1.0 means the trip was slower than expected.
double travel_time_ratio(const VehicleTripRecord& record);

/// Fraction of recorded vehicles whose time-averaged |deviation ratio|
/// exceeds the window m.
double window_violation_ratio(const MetricsLedger& ledger, double m);

/// (found, filtered) of one formation execution.
std::pair<long, long> candidates_found_and_filtered(
    const FormationExecutionRecord& execution);

/// One row of summary.csv.
struct SummaryRow {
  std::string approach;
  double speed_window = 0.0;
  double target_density = 0.0;
  std::uint64_t seed = 0;

  long trips = 0;
  std::optional<double> found_mean, found_std;
  std::optional<double> filtered_mean, filtered_std;
  std::optional<double> time_to_platoon_mean, time_to_platoon_std;
  std::string platoon_size_hist;  // "size:mean_vehicles|..."
  std::optional<double> mean_platoon_size;
  std::optional<double> departure_flow_vph;
  std::optional<double> density_mean;
  std::optional<double> speed_mean;
  std::optional<double> dev_mean, dev_q25, dev_median, dev_q75;
  std::optional<double> abs_dev_mean;
  std::optional<double> window_violation;
  std::optional<double> ttr_mean, ttr_q25, ttr_median, ttr_q75;
  std::optional<double> fuel_l100km_mean, fuel_l100km_std;
  std::optional<double> solver_time_mean, solver_time_std;
  std::optional<double> gap_mean, gap_max;
};

/// Collapses a run's ledger into its summary row; empty ledger yields none.
std::optional<SummaryRow> aggregate(const MetricsLedger& ledger,
                                    const ScenarioConfig& config);

const std::vector<std::string>& summary_columns();

/// Column subset backing one of the report figure families (3..13);
/// throws on an unknown figure number.
std::vector<std::string> figure_columns(int figure);

void write_vehicles_csv(const std::string& path, const MetricsLedger& ledger);
void write_formation_csv(const std::string& path, const MetricsLedger& ledger);
void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows,
                       const std::optional<int>& figure = std::nullopt);

}  // namespace convoy
