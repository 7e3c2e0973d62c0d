#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <dqm/estimation.hpp>

namespace dqm {

struct EstimationSettings {
    std::int64_t shots = 100000;
    double stage1_fraction = 0.1;
    int rounds = 1;
    std::uint64_t seed = 20260822;
    double horizon = 1.0;
    double stage1_half_width = 0.5;
};

struct Scenario {
    std::string name;
    SensorNetwork network;
    ParameterPoint truth;
    ParameterPoint start; // prior center for estimation stages
    WeightVector weights;
    std::vector<double> sweep = {0.5, 1.0, 2.0, 4.0, 8.0};
    int steps_per_unit_time = 2000;
    ProbeSpec probe;
    ControlStrategy control = ControlStrategy::none;
    EstimationSettings estimation;

    int grid_steps(double horizon) const;
};

std::vector<std::string> builtin_names();

Scenario builtin_scenario(const std::string& name);

// Reproducible scenario with low-order trigonometric field profiles whose
// magnitude stays below the smoothness bound over |x_j| <= 1.
Scenario random_scenario(std::uint64_t seed, int parameters, int nodes,
                         int qubits, double smoothness);

struct ScenarioRow {
    double horizon = 0.0;
    double qfi_controlled = 0.0;
    double qfi_uncontrolled = 0.0;
    double upper_bound = 0.0;
    double cfi = 0.0;
    double precision = 0.0; // variance floor at one repetition
};

struct ScenarioReport {
    std::string name;
    std::vector<ScenarioRow> rows;
    std::vector<EstimationResult> estimation; // one entry per repetition
};

struct RunOptions {
    bool with_estimation = false;
    int repetitions = 1;
    std::vector<double> sweep_override;
    int steps_override = 0;
};

ScenarioReport run_scenario(const Scenario& s);
ScenarioReport run_scenario(const Scenario& s, const RunOptions& options);

} // namespace dqm
