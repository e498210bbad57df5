#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace convoy {

/// Vehicle identifiers are positive and unique for the lifetime of a run.
/// A platoon is identified by its current leader's id.
using VehicleId = std::uint32_t;
inline constexpr VehicleId kNoVehicle = 0;

constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }
constexpr double mps_to_kmh(double mps) { return mps * 3.6; }

enum class CfMode { Krauss, Acc, Cacc };
enum class VehicleRole { Individual, Leader, Follower };

enum class Approach {
  Human,
  Acc,
  DistributedGreedy,
  CentralizedGreedy,
  CentralizedSolver,
};

/// True for the approaches that run a formation algorithm.
constexpr bool is_platooning(Approach a) {
  return a == Approach::DistributedGreedy || a == Approach::CentralizedGreedy ||
         a == Approach::CentralizedSolver;
}

std::string to_string(Approach a);
Approach parse_approach(const std::string& name);

/// Unified view of an assignment target: an individual vehicle or a platoon
/// represented by its leader. For individuals the rear position equals the
/// front position.
struct PlatoonableEntity {
  VehicleId id = kNoVehicle;
  double desired_speed = 0.0;   // m/s
  double front_position = 0.0;  // m from road start, front bumper
  double rear_position = 0.0;   // front-bumper position of the last member
};

/// An in-flight join: the searcher approaches `target` (a platoon id or an
/// individual) and becomes a follower at `completion_time`.
struct JoinManeuver {
  VehicleId target = kNoVehicle;
  double completion_time = 0.0;  // s
};

struct VehicleState {
  VehicleId id = kNoVehicle;
  double desired_speed = 0.0;  // m/s, drawn once at spawn
  double position = 0.0;       // m, front bumper
  int lane = 0;                // 0 = rightmost
  double speed = 0.0;          // m/s
  double acceleration = 0.0;   // m/s^2
  CfMode cf_mode = CfMode::Krauss;
  VehicleRole role = VehicleRole::Individual;
  std::optional<JoinManeuver> maneuver;
  // Set on a target (individual or platoon leader) while a searcher is
  // approaching it; at most one inbound joiner at a time.
  VehicleId inbound_joiner = kNoVehicle;
  double depart_time = 0.0;
  double depart_ramp = 0.0;
  double arrival_ramp = 0.0;
  VehicleId platoon_id = kNoVehicle;

  double rear_position(double vehicle_length) const {
    return position - vehicle_length;
  }
};

/// Ordered front-to-back; members.front() is the leader.
struct Platoon {
  VehicleId leader = kNoVehicle;
  std::vector<VehicleId> members;

  std::size_t size() const { return members.size(); }
};

struct FormationParams {
  double alpha = 0.5;            // weight of the speed deviation
  double speed_window = 0.2;     // m, allowed relative speed deviation
  double position_range = 1000;  // r, search range in m
  double execution_interval = 60.0;
  double comm_range = 500.0;         // distributed only
  double solver_time_limit = 600.0;  // centralized solver only
};

/// Car-following constants shared by all models.
struct CfParams {
  double krauss_headway = 1.0;  // s
  double acc_headway = 1.0;     // s
  double cacc_gap = 5.0;        // m, constant spacing
  double max_speed = kmh_to_mps(200.0);
  double max_accel = 2.5;   // m/s^2
  double max_decel = 10.0;  // m/s^2, positive
  double vehicle_length = 5.0;
  double min_gap = 2.5;  // m, never encroached while driving

  // Controller gains; the cited laws leave these open.
  double acc_spacing_gain = 0.1;  // lambda
  double acc_speed_gain = 0.4;    // 1/s, free-flow speed tracking
  double cacc_c1 = 0.5;
  double cacc_omega = 0.2;  // rad/s
  double cacc_xi = 1.0;
};

struct ScenarioConfig {
  double road_length = 100000.0;   // m
  int lanes = 3;
  double ramp_interval = 10000.0;  // m
  double trip_length = 50000.0;    // m
  double speed_mean = 33.0;        // m/s
  double speed_rel_stddev = 0.1;
  double speed_min = kmh_to_mps(80.0);
  double speed_max = kmh_to_mps(160.0);
  double target_density = 5.0;  // vehicles per lane-km
  double sim_duration = 7200.0;
  double warmup = 1800.0;
  double step_length = 1.0;
  double sample_interval = 60.0;
  std::uint64_t seed = 1;
  Approach approach = Approach::DistributedGreedy;
  FormationParams formation;
  CfParams cf;
  std::string trace_file;        // per-step trace CSV, empty = off
  std::string fuel_coeffs_file;  // override fuel model coefficients

  double road_length_km() const { return road_length / 1000.0; }
};

/// Thrown when a simulation-state invariant is broken (a model bug, never
/// swallowed). The CLI maps it to exit code 3.
class InvariantViolation : public std::runtime_error {
 public:
  explicit InvariantViolation(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace convoy
