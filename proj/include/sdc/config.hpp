#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sdc/experiments.hpp"

namespace sdc {

/// Schema violation. `issues` lists one "path: problem" entry per field.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> issues);
    const std::vector<std::string>& issues() const { return issues_; }

private:
    std::vector<std::string> issues_;
};

/// Parses a JSON config. Missing keys keep their defaults; unknown keys,
/// wrong types and out-of-range values are all reported together.
/// Overrides have the form "section.key=value" with a JSON value (bare
/// words are taken as strings) and are applied before validation.
ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Full config with every key spelled out; parses back to the same values.
std::string config_to_json(const ExperimentConfig& cfg);

/// Range checks across fields; empty when the config is usable.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

}  // namespace sdc
