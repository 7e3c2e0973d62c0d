#pragma once

#include <functional>
#include <vector>

#include <dqm/operators.hpp>
#include <dqm/time_grid.hpp>

namespace dqm {

using RealVector = Eigen::VectorXd;
using ParameterPoint = RealVector;
using WeightVector = RealVector;

// Local field direction for one node as a function of the parameter vector
// and time. analytic_partial may be left empty; partial_field then falls back
// to central finite differences.
struct FieldFunction {
    std::function<PauliVector(const ParameterPoint&, double)> evaluate;
    std::function<PauliVector(int, const ParameterPoint&, double)> analytic_partial;
};

struct SensorNode {
    int qubit_count = 1;
    FieldFunction field;
};

// A network of sensor nodes; all qubits within a node see the same field.
struct SensorNetwork {
    std::vector<SensorNode> nodes;
    int parameter_count = 0;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int total_qubits() const;
    int qubit_offset(int k) const;
};

void validate_network(const SensorNetwork& net);

// Built-in field families. Each couples to a single parameter index.
FieldFunction constant_z_field(int j);
FieldFunction angle_field(int j);
FieldFunction ac_field(int j);
FieldFunction tabulated_field(int j, std::vector<double> times,
                              std::vector<PauliVector> samples);

inline constexpr double default_fd_step = 1e-6;

CMatrix free_hamiltonian(const SensorNetwork& net, const ParameterPoint& x,
                         double t);

PauliVector partial_field(const SensorNetwork& net, int k, int j,
                          const ParameterPoint& x, double t,
                          double step = default_fd_step);

PauliVector v_operator(const SensorNetwork& net, int k, int i,
                       const ParameterPoint& x, double t,
                       const WeightVector& w);

double v_magnitude_integral(const SensorNetwork& net, int k, int i,
                            const ParameterPoint& x, const WeightVector& w,
                            const TimeGrid& grid);

} // namespace dqm
