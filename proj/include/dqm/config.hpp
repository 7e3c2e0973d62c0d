#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <dqm/scenarios.hpp>

namespace dqm {

using ConfigJson = nlohmann::ordered_json;

struct OutputSpec {
    std::string directory; // empty: print to stdout only
    bool csv = true;
    bool json = true;
};

// Command-line selection plus value overrides. Anything left unset falls
// back to the config file and then to the scenario defaults.
struct ConfigOverrides {
    std::string scenario;    // builtin name or random:<seed>:<d>:<N>:<Q>[:<s>]
    std::string config_file; // JSON config, bare scenario object, or manifest
    std::vector<double> sweep;
    std::optional<int> steps;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> shots;
    std::optional<int> rounds;
    std::optional<std::string> probe;
    std::optional<std::string> control;
    std::optional<std::string> out_dir;
    std::vector<std::string> formats;
    std::optional<int> repetitions;
};

struct RunConfig {
    Scenario scenario;
    int repetitions = 1;
    OutputSpec output;
    // Fully resolved echo; feeding it back through --config reproduces the
    // run byte for byte.
    ConfigJson resolved;
};

// Resolves scenario source, file keys, and flag overrides in that order,
// validates the result, and rejects unknown keys by name.
RunConfig parse_config(const ConfigOverrides& overrides);

// Scenario described inline as JSON (see README for the schema).
Scenario scenario_from_json(const ConfigJson& spec);

ProbeKind probe_kind_from_name(const std::string& name);
ControlStrategy control_from_name(const std::string& name);
std::string probe_name(ProbeKind kind);
std::string control_name(ControlStrategy strategy);

} // namespace dqm
