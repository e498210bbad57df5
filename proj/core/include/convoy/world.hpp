#pragma once

#include <deque>
#include <map>

#include "convoy/rng.hpp"
#include "convoy/types.hpp"

namespace convoy {

/// A spawn that could not be placed yet; retried every step at its ramp.
struct PendingInsertion {
  VehicleId id = kNoVehicle;
  double desired_speed = 0.0;
  double depart_ramp = 0.0;
};

/// Full road state; mutated only by the simulation loop.
struct WorldState {
  double clock = 0.0;
  std::map<VehicleId, VehicleState> vehicles;
  std::map<VehicleId, Platoon> platoons;  // keyed by leader id
  Rng rng;
  ScenarioConfig config;

  VehicleId next_id = 1;
  std::deque<PendingInsertion> deferred;
  long spawned_total = 0;  // attempts, including deferred
  long arrived_total = 0;

  explicit WorldState(const ScenarioConfig& cfg)
      : rng(cfg.seed), config(cfg) {}

  VehicleId allocate_id() { return next_id++; }
};

/// Available to run a search: an individual vehicle with no maneuver in
/// either direction.
bool is_available_searcher(const VehicleState& v);

/// Available as an assignment target: an individual or a platoon leader,
/// not involved in a maneuver.
bool is_available_target(const VehicleState& v);

/// The {n, D, p, l} view of an individual or a platoon (leader id). For a
/// platoon, desired speed and front position come from the leader, the rear
/// position from the last member. Undefined exactly on followers.
PlatoonableEntity entity_view(const WorldState& world, VehicleId id);

}  // namespace convoy
