#pragma once

#include "convoy/types.hpp"

namespace convoy {

/// Deviation of a target entity from a searching vehicle. `total` is the
/// weighted sum of the two normalized components; a self pair always carries
/// the largest possible deviation of exactly 1.0.
struct Deviation {
  double speed_dev = 0.0;
  double position_dev = 0.0;
  double total = 0.0;
};

/// ||D_c - D_t|| / (m * D_c). Not symmetric: the denominator uses the
/// searcher's desired speed.
double speed_deviation(const PlatoonableEntity& c, const PlatoonableEntity& t,
                       double speed_window);

/// min(||p_c - p_t||, ||l_t - p_c||) / r.
double position_deviation(const PlatoonableEntity& c,
                          const PlatoonableEntity& t, double position_range);

Deviation deviation(const PlatoonableEntity& c, const PlatoonableEntity& t,
                    const FormationParams& params);

/// True iff both deviation windows hold (inclusive 1.0 thresholds) and the
/// target is not behind the searcher. Self pairs are always eligible.
bool is_eligible(const PlatoonableEntity& c, const PlatoonableEntity& t,
                 const FormationParams& params);

}  // namespace convoy
