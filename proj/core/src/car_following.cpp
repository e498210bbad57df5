#include "convoy/car_following.hpp"

#include <algorithm>
#include <cmath>

namespace convoy {

double krauss_next_speed(double ego_speed, double desired_speed,
                         std::optional<LeaderInfo> leader, const CfParams& cf,
                         double dt) {
  const double v_cap = std::min(desired_speed, cf.max_speed);
  double v_next = std::min(v_cap, ego_speed + cf.max_accel * dt);
  if (leader) {
    const double tau = cf.krauss_headway;
    const double v_safe =
        leader->speed + (leader->net_gap - leader->speed * tau) /
                            (ego_speed / cf.max_decel + tau);
    v_next = std::min(v_next, v_safe);
  }
  return std::max(0.0, v_next);
}

double acc_acceleration(double ego_speed, double desired_speed,
                        std::optional<LeaderInfo> leader, const CfParams& cf) {
  const double a_free = cf.acc_speed_gain * (desired_speed - ego_speed);
  double a = a_free;
  if (leader) {
    const double spacing_error = leader->net_gap - cf.acc_headway * ego_speed;
    const double a_gap = (cf.acc_spacing_gain * spacing_error +
                          (leader->speed - ego_speed)) /
                         cf.acc_headway;
    a = std::min(a_free, a_gap);
  }
  return std::clamp(a, -cf.max_decel, cf.max_accel);
}

double cacc_acceleration(double ego_speed, const PlatoonContext& ctx,
                         const CfParams& cf) {
  const double c1 = cf.cacc_c1;
  const double omega = cf.cacc_omega;
  const double xi = cf.cacc_xi;
  const double root = std::sqrt(std::max(0.0, xi * xi - 1.0));
  const double spacing_error = ctx.gap - cf.cacc_gap;  // positive: too far
  const double a = (1.0 - c1) * ctx.predecessor_accel +
                   c1 * ctx.leader_accel -
                   (2.0 * xi - c1 * (xi + root)) * omega *
                       (ego_speed - ctx.predecessor_speed) -
                   (xi + root) * omega * c1 * (ego_speed - ctx.leader_speed) +
                   omega * omega * spacing_error;
  return std::clamp(a, -cf.max_decel, cf.max_accel);
}

}  // namespace convoy
