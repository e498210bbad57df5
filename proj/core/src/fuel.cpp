#include "convoy/fuel.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace convoy {

namespace {
constexpr double kGravity = 9.81;
}

FuelCoefficients load_fuel_coefficients(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open fuel coefficient file: " + path);
  }
  FuelCoefficients c;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const double value = std::stod(trim(line.substr(eq + 1)));
    if (key == "mass_kg") c.mass_kg = value;
    else if (key == "rolling_resistance") c.rolling_resistance = value;
    else if (key == "drag_area_m2") c.drag_area_m2 = value;
    else if (key == "air_density") c.air_density = value;
    else if (key == "idle_lps") c.idle_lps = value;
    else if (key == "energy_per_liter_j") c.energy_per_liter_j = value;
    else if (key == "eta") c.eta = value;
    else if (key == "delta_lead") c.delta_lead = value;
    else if (key == "delta_middle") c.delta_middle = value;
    else if (key == "delta_last") c.delta_last = value;
    else {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": unknown fuel coefficient '" + key + "'");
    }
  }
  return c;
}

double platoon_fuel_factor(PlatoonPosition position,
                           const FuelCoefficients& c) {
  switch (position) {
    case PlatoonPosition::Solo:
      return 1.0;
    case PlatoonPosition::Lead:
      return 1.0 - c.eta * c.delta_lead;
    case PlatoonPosition::Middle:
      return 1.0 - c.eta * c.delta_middle;
    case PlatoonPosition::Last:
      return 1.0 - c.eta * c.delta_last;
  }
  return 1.0;
}

double fuel_step_liters(double speed, double accel, double dt,
                        PlatoonPosition position, const FuelCoefficients& c) {
  const double inertial = c.mass_kg * accel * speed;
  const double rolling = c.mass_kg * kGravity * c.rolling_resistance * speed;
  const double drag = 0.5 * c.air_density * c.drag_area_m2 * speed * speed *
                      speed;
  const double power = inertial + rolling + drag;  // W
  double lps = c.idle_lps;
  if (power > 0.0) lps += power / c.energy_per_liter_j;
  return lps * dt * platoon_fuel_factor(position, c);
}

}  // namespace convoy
