#pragma once

// Shared test fixtures: the four-vehicle reference scenario and small world
// builders used across the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <vector>

#include "convoy/traffic.hpp"
#include "convoy/world.hpp"

namespace convoy::testing {

inline PlatoonableEntity entity(VehicleId id, double speed_kmh,
                                double front_m, double rear_m) {
  return PlatoonableEntity{id, kmh_to_mps(speed_kmh), front_m, rear_m};
}

inline PlatoonableEntity entity(VehicleId id, double speed_kmh,
                                double position_m) {
  return entity(id, speed_kmh, position_m, position_m);
}

/// Parameters of the four-vehicle reference scenario: alpha 0.6, speed
/// window 0.6, search range 400 m (the frozen reference deviations are
/// only consistent with a 0.6 window).
inline FormationParams example_params() {
  FormationParams p;
  p.alpha = 0.6;
  p.speed_window = 0.6;
  p.position_range = 400.0;
  p.comm_range = 500.0;
  return p;
}

struct ExampleVehicle {
  VehicleId id;
  double speed_kmh;
  double position_m;
};

inline const std::vector<ExampleVehicle>& example_vehicles() {
  static const std::vector<ExampleVehicle> v = {
      {5, 121.0, 430.0},
      {13, 89.0, 270.0},
      {20, 107.0, 250.0},
      {37, 93.0, 70.0},
  };
  return v;
}

inline ScenarioConfig example_config() {
  ScenarioConfig cfg;
  cfg.road_length = 10000.0;
  cfg.ramp_interval = 1000.0;
  cfg.trip_length = 5000.0;
  cfg.target_density = 0.0;  // no pre-fill, no demand
  cfg.sim_duration = 3600.0;
  cfg.warmup = 0.0;
  cfg.approach = Approach::CentralizedGreedy;
  cfg.formation = example_params();
  return cfg;
}

/// The four individually driving vehicles of the reference scenario.
inline WorldState example_world() {
  WorldState world(example_config());
  for (const auto& e : example_vehicles()) {
    VehicleState v;
    v.id = e.id;
    v.desired_speed = kmh_to_mps(e.speed_kmh);
    v.position = e.position_m;
    v.speed = v.desired_speed;
    v.lane = e.id % 2;  // two lanes, as in the illustration
    v.cf_mode = CfMode::Acc;
    v.depart_ramp = 0.0;
    v.arrival_ramp = 5000.0;
    world.vehicles.emplace(e.id, v);
    world.next_id = std::max(world.next_id, e.id + 1);
  }
  world.spawned_total = 4;
  return world;
}

/// Deviation totals of the six reference candidate pairs, in scan order:
/// full precision frozen from an independent evaluation of the formulas,
/// plus the rounded reference figure each derives from.
struct GoldenPair {
  VehicleId searcher;
  VehicleId target;
  double total;
  double rounded;  // reference figure, from 3-decimal truncated terms
};

inline const std::vector<GoldenPair>& golden_pairs() {
  static const std::vector<GoldenPair> g = {
      {13, 5, 0.5195505617977528, 0.519},
      {20, 5, 0.3108411214953271, 0.310},
      {20, 13, 0.18822429906542054, 0.188},
      {37, 5, 0.6610752688172044, 0.660},
      {37, 13, 0.24301075268817207, 0.242},
      {37, 20, 0.3305376344086022, 0.330},
  };
  return g;
}

/// Rounded-arithmetic variant behind the reference figures: deviation
/// components truncated to 3 decimals before weighting, the total truncated
/// again.
inline double truncate3(double x) {
  return std::floor(x * 1000.0 + 1e-9) / 1000.0;
}

inline double rounded_deviation(const PlatoonableEntity& c,
                                const PlatoonableEntity& t,
                                const FormationParams& p) {
  const double ds = truncate3(speed_deviation(c, t, p.speed_window));
  const double dp = truncate3(position_deviation(c, t, p.position_range));
  return truncate3(p.alpha * ds + (1.0 - p.alpha) * dp);
}

/// Random small instance for the solver oracle: n individuals with random
/// positions and desired speeds under moderately tight windows.
inline WorldState random_instance(Rng& rng, int n) {
  ScenarioConfig cfg = example_config();
  cfg.formation.alpha = 0.5;
  cfg.formation.speed_window = 0.3;
  cfg.formation.position_range = 400.0;
  WorldState world(cfg);
  for (int i = 0; i < n; ++i) {
    VehicleState v;
    v.id = static_cast<VehicleId>(i + 1);
    v.desired_speed = rng.uniform(kmh_to_mps(80.0), kmh_to_mps(160.0));
    v.position = rng.uniform(0.0, 2000.0);
    v.speed = v.desired_speed;
    v.cf_mode = CfMode::Acc;
    v.arrival_ramp = 10000.0;
    world.vehicles.emplace(v.id, v);
    world.next_id = v.id + 1;
  }
  world.spawned_total = n;
  return world;
}

}  // namespace convoy::testing
