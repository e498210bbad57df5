#pragma once

#include <optional>

#include "convoy/types.hpp"

namespace convoy {

/// Snapshot of the vehicle directly ahead in the same lane. `net_gap` is the
/// bumper-to-bumper gap minus the minimum gap, i.e. the drivable distance.
struct LeaderInfo {
  double speed = 0.0;
  double net_gap = 0.0;
  double accel = 0.0;
};

/// Inputs of the constant-spacing controller: the immediate predecessor and
/// the platoon leader. `gap` here is the raw bumper-to-bumper distance to the
/// predecessor; the controller regulates it to the configured constant gap.
struct PlatoonContext {
  double gap = 0.0;
  double predecessor_speed = 0.0;
  double predecessor_accel = 0.0;
  double leader_speed = 0.0;
  double leader_accel = 0.0;
};

/// Krauss safe-speed model without dawdling. Returns the next speed.
double krauss_next_speed(double ego_speed, double desired_speed,
                         std::optional<LeaderInfo> leader,
                         const CfParams& cf, double dt);

/// Constant-time-gap ACC; spacing term per the cited law, capped by plain
/// desired-speed tracking so a distant leader never pulls the vehicle above
/// its own desired speed. Returns an acceleration.
double acc_acceleration(double ego_speed, double desired_speed,
                        std::optional<LeaderInfo> leader, const CfParams& cf);

/// Constant-spacing CACC with predecessor and leader feedforward. Returns an
/// acceleration; zero at equilibrium (equal speeds, gap at setpoint).
double cacc_acceleration(double ego_speed, const PlatoonContext& ctx,
                         const CfParams& cf);

}  // namespace convoy
