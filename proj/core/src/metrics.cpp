#include "convoy/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "convoy/csv.hpp"

namespace convoy {

void Welford::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double Welford::stddev() const {
  if (n_ < 2) return 0.0;
  return std::sqrt(m2_ / static_cast<double>(n_ - 1));
}

double speed_deviation_ratio(double current_speed, double desired_speed) {
  return (current_speed - desired_speed) / desired_speed;
}

double travel_time_ratio(const VehicleTripRecord& record) {
  return record.real_travel_time / record.expected_travel_time;
}

double window_violation_ratio(const MetricsLedger& ledger, double m) {
  const auto& trips = ledger.trips();
  if (trips.empty()) return 0.0;
  long violators = 0;
  for (const auto& t : trips) {
    if (t.mean_abs_speed_deviation_ratio > m) ++violators;
  }
  return static_cast<double>(violators) / static_cast<double>(trips.size());
}

std::pair<long, long> candidates_found_and_filtered(
    const FormationExecutionRecord& execution) {
  return {execution.candidates_found, execution.candidates_filtered};
}

namespace {

double quantile(std::vector<double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, n - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string field(const std::optional<double>& v) {
  return v ? csv_format(*v) : std::string{};
}

}  // namespace

std::optional<SummaryRow> aggregate(const MetricsLedger& ledger,
                                    const ScenarioConfig& config) {
  if (ledger.empty()) return std::nullopt;

  SummaryRow row;
  row.approach = to_string(config.approach);
  row.speed_window = config.formation.speed_window;
  row.target_density = config.target_density;
  row.seed = config.seed;
  row.trips = static_cast<long>(ledger.trips().size());

  if (ledger.found_per_scan().count() > 0) {
    row.found_mean = ledger.found_per_scan().mean();
    row.found_std = ledger.found_per_scan().stddev();
    row.filtered_mean = ledger.filtered_per_scan().mean();
    row.filtered_std = ledger.filtered_per_scan().stddev();
  }

  Welford ttp;
  Welford fuel;
  std::vector<double> devs, ttrs;
  double abs_dev_sum = 0.0;
  for (const auto& t : ledger.trips()) {
    if (t.time_to_platoon) ttp.add(*t.time_to_platoon);
    if (t.distance > 0.0) {
      fuel.add(t.fuel_liters / (t.distance / 100000.0));
    }
    devs.push_back(t.mean_speed_deviation_ratio);
    abs_dev_sum += t.mean_abs_speed_deviation_ratio;
    ttrs.push_back(travel_time_ratio(t));
  }
  if (ttp.count() > 0) {
    row.time_to_platoon_mean = ttp.mean();
    row.time_to_platoon_std = ttp.stddev();
  }
  if (fuel.count() > 0) {
    row.fuel_l100km_mean = fuel.mean();
    row.fuel_l100km_std = fuel.stddev();
  }
  if (!devs.empty()) {
    std::sort(devs.begin(), devs.end());
    Welford w;
    for (const double d : devs) w.add(d);
    row.dev_mean = w.mean();
    row.dev_q25 = quantile(devs, 0.25);
    row.dev_median = quantile(devs, 0.5);
    row.dev_q75 = quantile(devs, 0.75);
    row.abs_dev_mean = abs_dev_sum / static_cast<double>(devs.size());
    row.window_violation =
        window_violation_ratio(ledger, config.formation.speed_window);
  }
  if (!ttrs.empty()) {
    std::sort(ttrs.begin(), ttrs.end());
    Welford w;
    for (const double t : ttrs) w.add(t);
    row.ttr_mean = w.mean();
    row.ttr_q25 = quantile(ttrs, 0.25);
    row.ttr_median = quantile(ttrs, 0.5);
    row.ttr_q75 = quantile(ttrs, 0.75);
  }

  if (!ledger.samples().empty()) {
    Welford flow, density, speed;
    std::map<int, double> hist_sum;
    for (const auto& s : ledger.samples()) {
      flow.add(s.departure_flow_vph);
      density.add(s.density);
      if (s.vehicle_count > 0) speed.add(s.mean_speed);
      for (const auto& [size, count] : s.platoon_size_hist) {
        hist_sum[size] += static_cast<double>(count);
      }
    }
    row.departure_flow_vph = flow.mean();
    row.density_mean = density.mean();
    if (speed.count() > 0) row.speed_mean = speed.mean();
    const double n_samples = static_cast<double>(ledger.samples().size());
    std::string hist;
    double weighted_size = 0.0, total = 0.0;
    for (const auto& [size, sum] : hist_sum) {
      if (!hist.empty()) hist += '|';
      hist += std::to_string(size) + ':' + csv_format(sum / n_samples);
      weighted_size += static_cast<double>(size) * sum;
      total += sum;
    }
    row.platoon_size_hist = hist;
    if (total > 0.0) row.mean_platoon_size = weighted_size / total;
  }

  Welford stime, sgap;
  double gap_max = 0.0;
  bool any_solver = false;
  for (const auto& e : ledger.executions()) {
    if (e.strategy != Approach::CentralizedSolver) continue;
    any_solver = true;
    stime.add(e.solve_time);
    sgap.add(e.gap);
    gap_max = std::max(gap_max, e.gap);
  }
  if (any_solver) {
    row.solver_time_mean = stime.mean();
    row.solver_time_std = stime.stddev();
    row.gap_mean = sgap.mean();
    row.gap_max = gap_max;
  }
  return row;
}

const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols = {
      "approach", "speed_window", "target_density", "seed", "trips",
      "found_mean", "found_std", "filtered_mean", "filtered_std",
      "time_to_platoon_mean", "time_to_platoon_std", "platoon_size_hist",
      "mean_platoon_size", "departure_flow_vph", "density_mean", "speed_mean",
      "dev_mean", "dev_q25", "dev_median", "dev_q75", "abs_dev_mean",
      "window_violation", "ttr_mean", "ttr_q25", "ttr_median", "ttr_q75",
      "fuel_l100km_mean", "fuel_l100km_std", "solver_time_mean",
      "solver_time_std", "gap_mean", "gap_max"};
  return cols;
}

namespace {

std::vector<std::string> row_fields(const SummaryRow& r) {
  return {r.approach,
          csv_format(r.speed_window),
          csv_format(r.target_density),
          std::to_string(r.seed),
          csv_format(r.trips),
          field(r.found_mean),
          field(r.found_std),
          field(r.filtered_mean),
          field(r.filtered_std),
          field(r.time_to_platoon_mean),
          field(r.time_to_platoon_std),
          r.platoon_size_hist,
          field(r.mean_platoon_size),
          field(r.departure_flow_vph),
          field(r.density_mean),
          field(r.speed_mean),
          field(r.dev_mean),
          field(r.dev_q25),
          field(r.dev_median),
          field(r.dev_q75),
          field(r.abs_dev_mean),
          field(r.window_violation),
          field(r.ttr_mean),
          field(r.ttr_q25),
          field(r.ttr_median),
          field(r.ttr_q75),
          field(r.fuel_l100km_mean),
          field(r.fuel_l100km_std),
          field(r.solver_time_mean),
          field(r.solver_time_std),
          field(r.gap_mean),
          field(r.gap_max)};
}

}  // namespace

std::vector<std::string> figure_columns(int figure) {
  const std::vector<std::string> id = {"approach", "speed_window",
                                       "target_density", "seed"};
  std::vector<std::string> extra;
  switch (figure) {
    case 3: extra = {"found_mean", "found_std"}; break;
    case 4: extra = {"filtered_mean", "filtered_std"}; break;
    case 5: extra = {"time_to_platoon_mean", "time_to_platoon_std"}; break;
    case 6: extra = {"platoon_size_hist", "mean_platoon_size"}; break;
    case 7: extra = {"departure_flow_vph", "density_mean"}; break;
    case 8: extra = {"speed_mean"}; break;
    case 9: extra = {"dev_mean", "dev_q25", "dev_median", "dev_q75"}; break;
    case 10: extra = {"window_violation"}; break;
    case 11: extra = {"ttr_mean", "ttr_q25", "ttr_median", "ttr_q75"}; break;
    case 12: extra = {"fuel_l100km_mean", "fuel_l100km_std"}; break;
    case 13:
      extra = {"solver_time_mean", "solver_time_std", "gap_mean", "gap_max"};
      break;
    default:
      throw std::invalid_argument("unknown figure number " +
                                  std::to_string(figure) +
                                  " (expected 3..13)");
  }
  std::vector<std::string> cols = id;
  cols.insert(cols.end(), extra.begin(), extra.end());
  return cols;
}

void write_vehicles_csv(const std::string& path, const MetricsLedger& ledger) {
  CsvWriter csv(path,
                {"id", "desired_speed_mps", "depart_time_s", "arrival_time_s",
                 "expected_travel_time_s", "real_travel_time_s",
                 "time_to_platoon_s", "time_in_platoon_s", "distance_m",
                 "fuel_l", "mean_speed_mps", "mean_speed_deviation_ratio",
                 "mean_abs_speed_deviation_ratio"});
  for (const auto& t : ledger.trips()) {
    csv.write_row({std::to_string(t.id), csv_format(t.desired_speed),
                   csv_format(t.depart_time), csv_format(t.arrival_time),
                   csv_format(t.expected_travel_time),
                   csv_format(t.real_travel_time), field(t.time_to_platoon),
                   csv_format(t.time_in_platoon), csv_format(t.distance),
                   csv_format(t.fuel_liters), csv_format(t.mean_speed),
                   csv_format(t.mean_speed_deviation_ratio),
                   csv_format(t.mean_abs_speed_deviation_ratio)});
  }
}

void write_formation_csv(const std::string& path,
                         const MetricsLedger& ledger) {
  CsvWriter csv(path, {"time", "strategy", "n_searchers",
                       "n_candidates_found", "n_candidates_filtered",
                       "n_joins_triggered", "objective_full",
                       "objective_paper_convention", "solve_time", "gap"});
  for (const auto& e : ledger.executions()) {
    csv.write_row({csv_format(e.time), to_string(e.strategy),
                   std::to_string(e.n_searchers),
                   csv_format(e.candidates_found),
                   csv_format(e.candidates_filtered),
                   std::to_string(e.joins_triggered),
                   csv_format(e.objective_full),
                   csv_format(e.objective_paper_convention),
                   csv_format(e.solve_time), csv_format(e.gap)});
  }
}

void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows,
                       const std::optional<int>& figure) {
  std::vector<std::string> cols = summary_columns();
  std::vector<std::size_t> keep;
  if (figure) {
    const auto wanted = figure_columns(*figure);
    std::vector<std::string> subset;
    for (const auto& name : wanted) {
      const auto it = std::find(cols.begin(), cols.end(), name);
      keep.push_back(static_cast<std::size_t>(it - cols.begin()));
      subset.push_back(name);
    }
    cols = subset;
  }
  CsvWriter csv(path, cols);
  for (const auto& r : rows) {
    std::vector<std::string> fields = row_fields(r);
    if (figure) {
      std::vector<std::string> subset;
      for (const std::size_t i : keep) subset.push_back(fields[i]);
      fields = subset;
    }
    csv.write_row(fields);
  }
}

}  // namespace convoy
