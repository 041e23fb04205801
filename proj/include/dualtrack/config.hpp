#pragma once

#include <map>
#include <string>
#include <vector>

#include "dualtrack/features.hpp"
#include "dualtrack/losses.hpp"
#include "dualtrack/sim.hpp"
#include "dualtrack/tracker.hpp"

namespace dualtrack {

inline constexpr const char* kToolVersion = "0.1.0";

// Everything a run needs, grouped by module. Keys use dotted namespaces:
// sim.*, tracker.*, labels.*, learner.*, features.*, loss.*.
struct AppConfig {
    SimConfig sim;
    TrackerConfig tracker;  // owns the labels.* and learner.* subtrees
    FeatureProviderConfig features;
    LossConfig loss;
};

// Applies one key=value assignment. Throws std::invalid_argument on an
// unknown key or a malformed value; messages name the offending key.
void apply_assignment(AppConfig& cfg, const std::string& key, const std::string& value);

// Applies flat key=value text onto an existing config: one assignment per
// line, blank lines and '#' comments ignored, later assignments override
// earlier ones. Numbers always use '.' as the decimal separator,
// independent of locale.
void apply_config_text(AppConfig& cfg, const std::string& text);

// apply_config_text starting from defaults.
AppConfig parse_config_text(const std::string& text);

// Every known key with its current value, defaults materialized. This is the
// config echo embedded in run records and reports; feeding each pair back
// through apply_assignment reproduces the same config.
std::map<std::string, std::string> echo_config(const AppConfig& cfg);

// Rebuilds a config from an echo map. Unknown keys are rejected.
AppConfig config_from_echo(const std::map<std::string, std::string>& echo);

}  // namespace dualtrack
