#include <dqm/scenarios.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include <dqm/rng.hpp>

namespace dqm {

namespace {

Scenario clock_sync_scenario() {
    Scenario s;
    s.name = "clock_sync";
    s.network.nodes.push_back({1, constant_z_field(0)});
    s.network.nodes.push_back({1, constant_z_field(1)});
    s.network.parameter_count = 2;
    s.truth = ParameterPoint(2);
    s.truth << 1.0, 1.0;
    s.start = s.truth;
    s.weights = WeightVector(2);
    s.weights << 1.0, -1.0;
    s.probe = {ProbeKind::bell_singlet, 2, {}};
    s.control = ControlStrategy::none;
    s.estimation.rounds = 1;
    return s;
}

Scenario radar_scenario() {
    Scenario s;
    s.name = "radar";
    s.network.nodes.push_back({1, angle_field(0)});
    s.network.nodes.push_back({1, angle_field(1)});
    s.network.parameter_count = 2;
    s.truth = ParameterPoint(2);
    s.truth << 0.3, 0.4;
    s.start = s.truth;
    s.weights = WeightVector(2);
    s.weights << 1.0, 1.0;
    s.probe = {ProbeKind::ghz, 2, {}};
    s.control = ControlStrategy::cancel;
    s.estimation.rounds = 3;
    return s;
}

Scenario ac_fields_scenario() {
    Scenario s;
    s.name = "ac_fields";
    s.network.nodes.push_back({1, ac_field(0)});
    s.network.nodes.push_back({1, ac_field(1)});
    s.network.parameter_count = 2;
    s.truth = ParameterPoint(2);
    s.truth << 1.0, 1.0;
    s.start = s.truth;
    s.weights = WeightVector(2);
    s.weights << 1.0, 1.0;
    s.probe = {ProbeKind::ghz, 2, {}};
    s.control = ControlStrategy::pi_pulse;
    s.estimation.rounds = 2;
    s.estimation.horizon = 2.0;
    return s;
}

struct TrigProfile {
    PauliVector axis;
    double base = 0.0;
    double amp1 = 0.0;
    double freq1 = 0.0;
    double phase1 = 0.0;
    double amp2 = 0.0;
    double freq2 = 0.0;
    double phase2 = 0.0;

    double coefficient(double t) const {
        return base + amp1 * std::cos(freq1 * t + phase1) +
               amp2 * std::cos(freq2 * t + phase2);
    }
};

FieldFunction trig_polynomial_field(std::vector<TrigProfile> profiles) {
    FieldFunction f;
    auto shared = std::make_shared<std::vector<TrigProfile>>(
        std::move(profiles));
    f.evaluate = [shared](const ParameterPoint& x, double t) {
        PauliVector v = PauliVector::Zero();
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            const auto& p = (*shared)[static_cast<std::size_t>(j)];
            v += x[j] * p.coefficient(t) * p.axis;
        }
        return v;
    };
    f.analytic_partial = [shared](int j, const ParameterPoint&, double t) {
        const auto& p = (*shared)[static_cast<std::size_t>(j)];
        return (p.coefficient(t) * p.axis).eval();
    };
    return f;
}

} // namespace

int Scenario::grid_steps(double horizon) const {
    const double steps = steps_per_unit_time * std::max(1.0, horizon);
    return std::max(1, static_cast<int>(std::lround(steps)));
}

std::vector<std::string> builtin_names() {
    return {"clock_sync", "radar", "ac_fields"};
}

Scenario builtin_scenario(const std::string& name) {
    if (name == "clock_sync")
        return clock_sync_scenario();
    if (name == "radar")
        return radar_scenario();
    if (name == "ac_fields")
        return ac_fields_scenario();
    throw std::invalid_argument("unknown scenario: " + name);
}

Scenario random_scenario(std::uint64_t seed, int parameters, int nodes,
                         int qubits, double smoothness) {
    if (parameters < 1)
        throw std::invalid_argument("need at least one parameter");
    if (nodes < 1 || qubits < nodes)
        throw std::invalid_argument("need at least one qubit per node");
    if (qubits > max_qubits)
        throw std::invalid_argument("qubit count out of range");
    if (!(smoothness > 0.0))
        throw std::invalid_argument("smoothness bound must be positive");

    std::uint64_t counter = 0;
    auto draw = [&](double lo, double hi) {
        return lo + (hi - lo) * keyed_uniform(seed, 0, counter++);
    };

    Scenario s;
    s.name = "random-" + std::to_string(seed);
    s.network.parameter_count = parameters;
    for (int k = 0; k < nodes; ++k) {
        std::vector<TrigProfile> profiles;
        double budget = 0.0;
        for (int j = 0; j < parameters; ++j) {
            TrigProfile p;
            p.axis =
                PauliVector(draw(-1, 1), draw(-1, 1), draw(-1, 1));
            if (p.axis.norm() < 0.2)
                p.axis = PauliVector(draw(0.5, 1), 0, draw(0.5, 1));
            p.base = draw(-1, 1);
            p.amp1 = draw(-1, 1);
            p.freq1 = draw(0, 2);
            p.phase1 = draw(0, 2 * M_PI);
            p.amp2 = draw(-0.5, 0.5);
            p.freq2 = draw(0, 2);
            p.phase2 = draw(0, 2 * M_PI);
            budget += (std::abs(p.base) + std::abs(p.amp1) + std::abs(p.amp2)) *
                      p.axis.norm();
            profiles.push_back(p);
        }
        const double scale = 0.999 * smoothness / std::max(budget, 1e-9);
        if (scale < 1.0)
            for (auto& p : profiles)
                p.axis *= scale;
        s.network.nodes.push_back({1, trig_polynomial_field(profiles)});
    }
    for (int extra = 0; extra < qubits - nodes; ++extra)
        s.network.nodes[static_cast<std::size_t>(extra % nodes)].qubit_count +=
            1;

    s.truth = ParameterPoint(parameters);
    s.start = ParameterPoint(parameters);
    s.weights = WeightVector(parameters);
    for (int j = 0; j < parameters; ++j) {
        s.truth[j] = draw(-0.9, 0.9);
        s.weights[j] = (draw(0, 1) < 0.5 ? -1.0 : 1.0) * draw(0.3, 1.0);
    }
    s.start = s.truth;
    s.sweep = {1.0};
    s.probe = {ProbeKind::ghz, qubits, {}};
    s.control = ControlStrategy::alignment;
    return s;
}

ScenarioReport run_scenario(const Scenario& s) {
    return run_scenario(s, RunOptions{});
}

ScenarioReport run_scenario(const Scenario& s, const RunOptions& options) {
    validate_network(s.network);
    if (s.weights.size() != s.network.parameter_count)
        throw std::invalid_argument("weight length mismatch");

    Scenario sc = s;
    if (options.steps_override > 0)
        sc.steps_per_unit_time = options.steps_override;
    const std::vector<double>& sweep =
        options.sweep_override.empty() ? sc.sweep : options.sweep_override;

    ScenarioReport report;
    report.name = sc.name;
    const double weight_norm2 = sc.weights.squaredNorm();

    for (double horizon : sweep) {
        const TimeGrid grid(horizon, sc.grid_steps(horizon));
        const auto controlled =
            combination_scan(sc.network, sc.truth, sc.weights, sc.probe,
                             sc.control, grid);
        const auto idle =
            combination_scan(sc.network, sc.truth, sc.weights, sc.probe,
                             ControlStrategy::none, grid);

        ScenarioRow row;
        row.horizon = horizon;
        row.qfi_controlled =
            effective_qfi(qfim(controlled.probe, controlled.generators),
                          sc.weights);
        row.qfi_uncontrolled =
            effective_qfi(qfim(idle.probe, idle.generators), sc.weights);
        row.upper_bound = qfi_upper_bound(sc.network, sc.truth, sc.weights,
                                          grid);
        if (row.qfi_controlled >
            row.upper_bound * (1.0 + 1e-6) + 1e-9)
            throw std::runtime_error("attained information beat the ceiling");

        const double info_unit =
            std::max(row.qfi_controlled / weight_norm2, 1e-6);
        const double dtheta =
            std::min(0.03 / std::sqrt(info_unit),
                     0.45 * controlled.half_width);
        row.cfi = weight_norm2 *
                  classical_fisher(controlled.distribution, 0.0, dtheta);
        row.precision = precision_bound(row.qfi_controlled, sc.weights, 1);
        report.rows.push_back(row);
    }

    if (options.with_estimation) {
        const auto& set = sc.estimation;
        const std::int64_t stage1 =
            std::llround(static_cast<double>(set.shots) * set.stage1_fraction);
        const std::int64_t final_shots = set.shots - stage1;
        const int reps = std::max(1, options.repetitions);
        for (int rep = 0; rep < reps; ++rep)
            report.estimation.push_back(
                adaptive_estimate(sc, stage1, final_shots, set.rounds,
                                  set.seed + static_cast<std::uint64_t>(rep)));
    }
    return report;
}

} // namespace dqm
