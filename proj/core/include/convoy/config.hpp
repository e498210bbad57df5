#pragma once

#include <stdexcept>
#include <string>

#include "convoy/types.hpp"

namespace convoy {

/// Bad key, bad value, or unreadable file. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Flat key=value text; '#' starts a comment. Unknown keys and out-of-range
/// values are rejected with the key name and line number. An empty file
/// yields the full set of defaults.
ScenarioConfig parse_config_file(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text,
                                 const std::string& origin = "<inline>");

/// Applies one key=value override on top of an existing config (used for
/// command-line flags). Throws ConfigError on unknown keys or bad values.
void apply_override(ScenarioConfig& config, const std::string& key,
                    const std::string& value);

/// Cross-field checks (warmup < duration, ramp grid, parameter ranges).
void validate(const ScenarioConfig& config);

/// Round-trips through parse_config_text: the manifest written next to run
/// outputs is exactly this serialization.
std::string serialize_config(const ScenarioConfig& config);

}  // namespace convoy
