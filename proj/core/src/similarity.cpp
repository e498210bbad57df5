#include "convoy/similarity.hpp"

#include <algorithm>
#include <cmath>

namespace convoy {

double speed_deviation(const PlatoonableEntity& c, const PlatoonableEntity& t,
                       double speed_window) {
  return std::abs(c.desired_speed - t.desired_speed) /
         (speed_window * c.desired_speed);
}

double position_deviation(const PlatoonableEntity& c,
                          const PlatoonableEntity& t, double position_range) {
  const double to_front = std::abs(c.front_position - t.front_position);
  const double to_rear = std::abs(t.rear_position - c.front_position);
  return std::min(to_front, to_rear) / position_range;
}

Deviation deviation(const PlatoonableEntity& c, const PlatoonableEntity& t,
                    const FormationParams& params) {
  if (c.id == t.id) {
    return Deviation{0.0, 0.0, 1.0};
  }
  Deviation d;
  d.speed_dev = speed_deviation(c, t, params.speed_window);
  d.position_dev = position_deviation(c, t, params.position_range);
  d.total = params.alpha * d.speed_dev + (1.0 - params.alpha) * d.position_dev;
  return d;
}

bool is_eligible(const PlatoonableEntity& c, const PlatoonableEntity& t,
                 const FormationParams& params) {
  if (c.id == t.id) return true;
  if (c.front_position > t.rear_position) return false;
  if (speed_deviation(c, t, params.speed_window) > 1.0) return false;
  if (position_deviation(c, t, params.position_range) > 1.0) return false;
  return true;
}

}  // namespace convoy
