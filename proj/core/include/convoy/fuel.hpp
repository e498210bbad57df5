#pragma once

#include <string>

namespace convoy {

/// Position of a vehicle within (or outside) a platoon for the air-drag
/// reduction factors.
enum class PlatoonPosition { Solo, Lead, Middle, Last };

/// Tractive-power fuel surrogate for a mid-size gasoline passenger car plus
/// the platoon drag-reduction law g_platoon = (1 - eta * delta) * g. The
/// base coefficients set the absolute scale (calibration-dependent); the
/// platoon reduction ratios are exact.
struct FuelCoefficients {
  double mass_kg = 1500.0;
  double rolling_resistance = 0.012;
  double drag_area_m2 = 0.70;  // Cd * A
  double air_density = 1.2041;
  double idle_lps = 0.00018;            // liters per second at idle
  double energy_per_liter_j = 9.5e6;    // net of engine efficiency
  double eta = 0.46;                    // drag-to-fuel coupling
  double delta_lead = 0.12;
  double delta_middle = 0.27;
  double delta_last = 0.23;
};

/// Reads key=value overrides for the coefficient table. Unknown keys are
/// rejected.
FuelCoefficients load_fuel_coefficients(const std::string& path);

double platoon_fuel_factor(PlatoonPosition position,
                           const FuelCoefficients& c);

/// Liters consumed over one step of `dt` seconds at the given speed and
/// acceleration. Braking adds no burn beyond the idle floor.
double fuel_step_liters(double speed, double accel, double dt,
                        PlatoonPosition position, const FuelCoefficients& c);

}  // namespace convoy
