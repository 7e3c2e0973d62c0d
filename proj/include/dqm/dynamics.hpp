#pragma once

#include <vector>

#include <dqm/control.hpp>
#include <dqm/model.hpp>
#include <dqm/time_grid.hpp>

namespace dqm {

// Time-ordered piecewise-constant propagation record. midpoint_products[m]
// is the cumulative propagator evaluated at the center of step m, the point
// where derivative operators are sampled.
struct PropagatorSchedule {
    TimeGrid grid;
    std::vector<CMatrix> step_unitaries;
    std::vector<CMatrix> midpoint_products;
    CMatrix total;
    bool local = false;
    std::vector<std::vector<Matrix2c>> qubit_steps;

    explicit PropagatorSchedule(TimeGrid grid_) : grid(grid_) {}
};

// Accumulated derivative operators: per_parameter[j] integrates the rotated
// j-th Hamiltonian derivative over [0, T]; combined is their weighted sum.
struct GeneratorSet {
    std::vector<CMatrix> per_parameter;
    CMatrix combined;
};

PropagatorSchedule propagate(const SensorNetwork& net, const ParameterPoint& x,
                             const TimeGrid& grid);
PropagatorSchedule propagate(const SensorNetwork& net, const ParameterPoint& x,
                             const ControlProtocol& control,
                             const TimeGrid& grid);

GeneratorSet generators(const SensorNetwork& net, const ParameterPoint& x,
                        const WeightVector& w,
                        const PropagatorSchedule& schedule,
                        const TimeGrid& grid);

CMatrix generator_oracle(const SensorNetwork& net, const ParameterPoint& x,
                         const TimeGrid& grid, int j, double eps);
CMatrix generator_oracle(const SensorNetwork& net, const ParameterPoint& x,
                         const ControlProtocol& control, const TimeGrid& grid,
                         int j, double eps);

CMatrix final_propagator(const SensorNetwork& net, const ParameterPoint& x,
                         const TimeGrid& grid);
CMatrix final_propagator(const SensorNetwork& net, const ParameterPoint& x,
                         const ControlProtocol& control, const TimeGrid& grid);

} // namespace dqm
