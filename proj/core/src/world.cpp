#include "convoy/world.hpp"

#include <stdexcept>

namespace convoy {

bool is_available_searcher(const VehicleState& v) {
  return v.role == VehicleRole::Individual && !v.maneuver.has_value() &&
         v.inbound_joiner == kNoVehicle;
}

bool is_available_target(const VehicleState& v) {
  if (v.role == VehicleRole::Follower) return false;
  return !v.maneuver.has_value() && v.inbound_joiner == kNoVehicle;
}

PlatoonableEntity entity_view(const WorldState& world, VehicleId id) {
  const auto it = world.vehicles.find(id);
  if (it == world.vehicles.end()) {
    throw std::out_of_range("entity_view: unknown vehicle id " +
                            std::to_string(id));
  }
  const VehicleState& v = it->second;
  if (v.role == VehicleRole::Follower) {
    throw std::invalid_argument("entity_view: vehicle " + std::to_string(id) +
                                " is a follower");
  }
  PlatoonableEntity e{v.id, v.desired_speed, v.position, v.position};
  if (v.role == VehicleRole::Leader) {
    const Platoon& p = world.platoons.at(v.platoon_id);
    e.rear_position = world.vehicles.at(p.members.back()).position;
  }
  return e;
}

}  // namespace convoy
