#include "convoy/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace convoy {

namespace {

struct KeySpec {
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("trailing characters");
  return v;
}

long parse_long(const std::string& s) {
  std::size_t used = 0;
  const long v = std::stol(s, &used);
  if (used != s.size()) throw std::invalid_argument("trailing characters");
  return v;
}

// Manifests must re-parse to the exact same configuration, so serialize at
// full round-trip precision (the 6-digit convention applies to metric CSVs,
// not to the config echo).
std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::map<std::string, KeySpec>& key_registry() {
  static const std::map<std::string, KeySpec> keys = [] {
    std::map<std::string, KeySpec> k;
    auto dbl = [&k](const std::string& name, double ScenarioConfig::* field) {
      k[name] = {[field](ScenarioConfig& c, const std::string& s) {
                   c.*field = parse_double(s);
                 },
                 [field](const ScenarioConfig& c) {
                   return format_value(c.*field);
                 }};
    };
    auto kmh = [&k](const std::string& name, double ScenarioConfig::* field) {
      k[name] = {[field](ScenarioConfig& c, const std::string& s) {
                   c.*field = kmh_to_mps(parse_double(s));
                 },
                 [field](const ScenarioConfig& c) {
                   return format_value(mps_to_kmh(c.*field));
                 }};
    };
    auto form = [&k](const std::string& name,
                     double FormationParams::* field) {
      k[name] = {[field](ScenarioConfig& c, const std::string& s) {
                   c.formation.*field = parse_double(s);
                 },
                 [field](const ScenarioConfig& c) {
                   return format_value(c.formation.*field);
                 }};
    };
    auto cfp = [&k](const std::string& name, double CfParams::* field) {
      k[name] = {[field](ScenarioConfig& c, const std::string& s) {
                   c.cf.*field = parse_double(s);
                 },
                 [field](const ScenarioConfig& c) {
                   return format_value(c.cf.*field);
                 }};
    };
    auto cfkmh = [&k](const std::string& name, double CfParams::* field) {
      k[name] = {[field](ScenarioConfig& c, const std::string& s) {
                   c.cf.*field = kmh_to_mps(parse_double(s));
                 },
                 [field](const ScenarioConfig& c) {
                   return format_value(mps_to_kmh(c.cf.*field));
                 }};
    };

    dbl("road_length_m", &ScenarioConfig::road_length);
    k["lanes"] = {[](ScenarioConfig& c, const std::string& s) {
                    c.lanes = static_cast<int>(parse_long(s));
                  },
                  [](const ScenarioConfig& c) {
                    return std::to_string(c.lanes);
                  }};
    dbl("ramp_interval_m", &ScenarioConfig::ramp_interval);
    dbl("trip_length_m", &ScenarioConfig::trip_length);
    dbl("speed_mean_mps", &ScenarioConfig::speed_mean);
    dbl("speed_rel_stddev", &ScenarioConfig::speed_rel_stddev);
    kmh("speed_min_kmh", &ScenarioConfig::speed_min);
    kmh("speed_max_kmh", &ScenarioConfig::speed_max);
    dbl("target_density", &ScenarioConfig::target_density);
    dbl("sim_duration_s", &ScenarioConfig::sim_duration);
    dbl("warmup_s", &ScenarioConfig::warmup);
    dbl("step_length_s", &ScenarioConfig::step_length);
    dbl("sample_interval_s", &ScenarioConfig::sample_interval);
    k["seed"] = {[](ScenarioConfig& c, const std::string& s) {
                   c.seed = static_cast<std::uint64_t>(std::stoull(s));
                 },
                 [](const ScenarioConfig& c) {
                   return std::to_string(c.seed);
                 }};
    k["approach"] = {[](ScenarioConfig& c, const std::string& s) {
                       c.approach = parse_approach(s);
                     },
                     [](const ScenarioConfig& c) {
                       return to_string(c.approach);
                     }};
    form("alpha", &FormationParams::alpha);
    form("speed_window", &FormationParams::speed_window);
    form("position_range_m", &FormationParams::position_range);
    form("execution_interval_s", &FormationParams::execution_interval);
    form("comm_range_m", &FormationParams::comm_range);
    form("solver_time_limit_s", &FormationParams::solver_time_limit);
    cfp("krauss_headway_s", &CfParams::krauss_headway);
    cfp("acc_headway_s", &CfParams::acc_headway);
    cfp("cacc_gap_m", &CfParams::cacc_gap);
    cfkmh("max_speed_kmh", &CfParams::max_speed);
    cfp("max_accel_mps2", &CfParams::max_accel);
    cfp("max_decel_mps2", &CfParams::max_decel);
    cfp("vehicle_length_m", &CfParams::vehicle_length);
    cfp("min_gap_m", &CfParams::min_gap);
    cfp("acc_spacing_gain", &CfParams::acc_spacing_gain);
    cfp("acc_speed_gain", &CfParams::acc_speed_gain);
    cfp("cacc_c1", &CfParams::cacc_c1);
    cfp("cacc_omega", &CfParams::cacc_omega);
    cfp("cacc_xi", &CfParams::cacc_xi);
    k["trace_file"] = {[](ScenarioConfig& c, const std::string& s) {
                         c.trace_file = s;
                       },
                       [](const ScenarioConfig& c) { return c.trace_file; }};
    k["fuel_coeffs_file"] = {
        [](ScenarioConfig& c, const std::string& s) {
          c.fuel_coeffs_file = s;
        },
        [](const ScenarioConfig& c) { return c.fuel_coeffs_file; }};
    return k;
  }();
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void apply_override(ScenarioConfig& config, const std::string& key,
                    const std::string& value) {
  const auto& keys = key_registry();
  const auto it = keys.find(key);
  if (it == keys.end()) {
    throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    it->second.set(config, value);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + value + " (" +
                      e.what() + ")");
  }
}

ScenarioConfig parse_config_text(const std::string& text,
                                 const std::string& origin) {
  ScenarioConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_override(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  validate(config);
  return config;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path);
}

void validate(const ScenarioConfig& c) {
  require(c.road_length > 0, "road_length_m must be positive");
  require(c.lanes > 0, "lanes must be positive");
  require(c.ramp_interval > 0, "ramp_interval_m must be positive");
  const double ramps = c.road_length / c.ramp_interval;
  require(std::abs(ramps - std::round(ramps)) < 1e-6,
          "ramp_interval_m must divide road_length_m");
  const double trips = c.trip_length / c.ramp_interval;
  require(std::abs(trips - std::round(trips)) < 1e-6,
          "trip_length_m must be a multiple of ramp_interval_m");
  require(c.trip_length > 0 && c.trip_length <= c.road_length,
          "trip_length_m must be positive and fit on the road");
  require(c.speed_mean > 0, "speed_mean_mps must be positive");
  require(c.speed_rel_stddev >= 0, "speed_rel_stddev must be non-negative");
  require(c.speed_min > 0 && c.speed_min <= c.speed_max,
          "speed_min_kmh/speed_max_kmh must be positive and ordered");
  require(c.target_density >= 0, "target_density must be non-negative");
  require(c.sim_duration > 0, "sim_duration_s must be positive");
  require(c.warmup >= 0 && c.warmup < c.sim_duration,
          "warmup_s must be non-negative and less than sim_duration_s");
  require(c.step_length > 0, "step_length_s must be positive");
  require(c.sample_interval > 0, "sample_interval_s must be positive");
  require(c.formation.alpha >= 0.0 && c.formation.alpha <= 1.0,
          "alpha must be within [0,1]");
  require(c.formation.speed_window > 0.0 && c.formation.speed_window <= 1.0,
          "speed_window must be within (0,1]");
  require(c.formation.position_range > 0,
          "position_range_m must be positive");
  require(c.formation.execution_interval > 0,
          "execution_interval_s must be positive");
  require(c.formation.comm_range > 0, "comm_range_m must be positive");
  require(c.formation.solver_time_limit > 0,
          "solver_time_limit_s must be positive");
  require(c.cf.krauss_headway > 0 && c.cf.acc_headway > 0,
          "headways must be positive");
  require(c.cf.cacc_gap > 0, "cacc_gap_m must be positive");
  require(c.cf.max_speed > 0, "max_speed_kmh must be positive");
  require(c.cf.max_accel > 0 && c.cf.max_decel > 0,
          "acceleration bounds must be positive");
  require(c.cf.vehicle_length > 0, "vehicle_length_m must be positive");
  require(c.cf.min_gap >= 0, "min_gap_m must be non-negative");
}

std::string serialize_config(const ScenarioConfig& config) {
  std::ostringstream out;
  for (const auto& [key, spec] : key_registry()) {
    out << key << " = " << spec.get(config) << '\n';
  }
  return out.str();
}

}  // namespace convoy
