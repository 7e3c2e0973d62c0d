#pragma once

#include <utility>
#include <vector>

#include <dqm/model.hpp>
#include <dqm/time_grid.hpp>

namespace dqm {

enum class ControlStrategy { none, cancel, alignment, pi_pulse, custom };

// Piecewise-constant single-qubit control fields: steps[m][q] is the control
// Hamiltonian direction for global qubit q over step m.
struct ControlProtocol {
    TimeGrid grid;
    ControlStrategy strategy;
    std::vector<std::vector<PauliVector>> steps;

    ControlProtocol(TimeGrid grid_, ControlStrategy strategy_, int qubits)
        : grid(grid_), strategy(strategy_),
          steps(static_cast<std::size_t>(grid_.steps),
                std::vector<PauliVector>(static_cast<std::size_t>(qubits),
                                         PauliVector::Zero())) {}

    int qubit_count() const {
        return steps.empty() ? 0 : static_cast<int>(steps.front().size());
    }
    double max_amplitude() const;
};

// Worst-case distance between the frame-rotated derivative operator and its
// ideal fixed-axis form, over all qubits and steps.
struct AlignmentResidual {
    double value = 0.0;
};

struct AlignmentSynthesis {
    ControlProtocol protocol;
    AlignmentResidual residual;
};

// Flat row form used for protocol export and import.
struct ControlTableRow {
    int step = 0;
    int qubit = 0;
    PauliVector h = PauliVector::Zero();
};

// True per node when that node's evolution cannot saturate the precision
// bound without active control.
std::vector<bool> needs_control(const SensorNetwork& net,
                                const ParameterPoint& x, const WeightVector& w,
                                double horizon = 1.0);

ControlProtocol cancel_control(const SensorNetwork& net,
                               const ParameterPoint& x_hat,
                               const TimeGrid& grid);

AlignmentSynthesis alignment_control(
    const SensorNetwork& net, const ParameterPoint& x_hat,
    const WeightVector& w, const TimeGrid& grid,
    const std::vector<PauliVector>& target_axes = {});

ControlProtocol pi_pulse_schedule(const SensorNetwork& net, int k,
                                  const ParameterPoint& x_hat,
                                  const WeightVector& w, const TimeGrid& grid);

// Dispatch over the non-custom strategies; pi-pulse schedules are merged
// over every node carrying signal.
ControlProtocol synthesize_control(const SensorNetwork& net,
                                   const ParameterPoint& x_hat,
                                   const WeightVector& w,
                                   ControlStrategy strategy,
                                   const TimeGrid& grid);

const char* control_tag(ControlStrategy strategy);

AlignmentResidual verify_protocol(const SensorNetwork& net,
                                  const ParameterPoint& x,
                                  const WeightVector& w,
                                  const ControlProtocol& protocol,
                                  const TimeGrid& grid);

std::vector<ControlTableRow> protocol_table(const ControlProtocol& protocol);

ControlProtocol protocol_from_table(const std::vector<ControlTableRow>& rows,
                                    const TimeGrid& grid, int qubits,
                                    ControlStrategy strategy =
                                        ControlStrategy::custom);

} // namespace dqm
