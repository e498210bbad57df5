#pragma once

#include <fstream>
#include <memory>
#include <unordered_map>
#include <unordered_set>

#include "convoy/assignment.hpp"
#include "convoy/fuel.hpp"
#include "convoy/metrics.hpp"
#include "convoy/world.hpp"

namespace convoy {

/// Demand implied by a target density: the expected trip time (rounded to
/// whole seconds) is inverted into a per-second arrival probability and
/// scaled by the desired number of vehicles on the road. Vehicles per hour.
double departure_rate(const ScenarioConfig& config);

/// Desired speed draw: normal around the mean, clamped to the configured
/// band.
double sample_desired_speed(Rng& rng, const ScenarioConfig& config);

/// Discrete-time freeway simulation. One instance per run; the loop is
/// single-threaded and the full trace is a pure function of (config, seed).
class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& config);

  /// Steps until sim_duration is reached.
  void run();

  /// One step: formation (if due), maneuvers, lane changes, car following,
  /// integration, arrivals, spawning, metrics sampling.
  void step();

  // Individual phases, exposed so tests can drive them directly.
  int run_formation_if_due();
  int maneuver_step();
  int lane_change_step();
  void apply_car_following();
  void integrate_and_check();
  void process_arrivals();
  int spawn_step();
  void sample_metrics();

  WorldState& world() { return world_; }
  const WorldState& world() const { return world_; }
  MetricsLedger& ledger() { return ledger_; }
  const MetricsLedger& ledger() const { return ledger_; }
  const FuelCoefficients& fuel_coefficients() const { return fuel_; }

  /// Raw bumper-to-bumper gap from a follower's front to its predecessor's
  /// rear; used by tests to probe platoon spacing.
  double gap_to_predecessor(VehicleId follower) const;

 private:
  struct TripAccum {
    bool tracked = false;  // departed after warm-up: counts toward metrics
    double sum_dev = 0.0;
    double sum_abs_dev = 0.0;
    double sum_speed = 0.0;
    long samples = 0;
    double distance = 0.0;
    double fuel_liters = 0.0;
    double time_in_platoon = 0.0;
    std::optional<double> time_to_platoon;
    double last_platoon_change = 0.0;
  };

  using LaneLists = std::vector<std::vector<VehicleId>>;  // front first
  // Per lane, (position, id) sorted ascending; the lane-change pass queries
  // and maintains it so neighbor lookups stay logarithmic.
  using LaneIndex = std::vector<std::vector<std::pair<double, VehicleId>>>;

  void prefill();
  LaneLists build_lane_lists() const;
  // Nearest vehicles around `position` in `lane`; ids in `exclude` skipped.
  VehicleId ahead_in_lane(int lane, double position,
                          const std::unordered_set<VehicleId>& exclude) const;
  VehicleId behind_in_lane(int lane, double position,
                           const std::unordered_set<VehicleId>& exclude) const;
  bool try_insert(VehicleId id, double desired_speed, double ramp);
  LaneIndex build_lane_index() const;
  VehicleId indexed_ahead(const LaneIndex& index, int lane, double position,
                          const std::unordered_set<VehicleId>& exclude) const;
  VehicleId indexed_behind(const LaneIndex& index, int lane, double position,
                           const std::unordered_set<VehicleId>& exclude) const;
  bool lane_safe(const LaneIndex& index, int lane, double position,
                 double speed,
                 const std::unordered_set<VehicleId>& exclude) const;
  double attainable_speed(const LaneIndex& index, int lane, double position,
                          double speed, double desired,
                          const std::unordered_set<VehicleId>& exclude) const;
  void complete_join(VehicleState& searcher);
  void abort_join(VehicleState& searcher);
  void dissolve_platoon_if_single(VehicleId platoon_id);
  void stamp_platoon_change(const Platoon& platoon);
  PlatoonPosition platoon_position(const VehicleState& v) const;
  void record_execution(Approach strategy, const CandidateScan& scan,
                        std::span<const CandidateEntry> selected,
                        int joins, double solve_time, double gap);
  void write_trace_row(const VehicleState& v);
  void check_conservation() const;

  WorldState world_;
  MetricsLedger ledger_;
  FuelCoefficients fuel_;
  std::unordered_map<VehicleId, TripAccum> accum_;
  std::unordered_map<VehicleId, double> staged_accel_;  // commands, phase 4
  LaneLists lanes_;  // valid during phases 4-5
  long departures_window_ = 0;
  long detector_window_ = 0;
  std::unique_ptr<std::ofstream> trace_;
};

}  // namespace convoy
