#include <dqm/model.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace dqm {

namespace {

void check_parameter_index(int j, const ParameterPoint& x) {
    if (j < 0 || j >= x.size())
        throw std::invalid_argument("field parameter index " + std::to_string(j) +
                                    " outside parameter vector of length " +
                                    std::to_string(x.size()));
}

// Piecewise-linear interpolation of tabulated samples, clamped at the ends.
PauliVector interpolate(const std::vector<double>& times,
                        const std::vector<PauliVector>& samples, double t) {
    if (t <= times.front())
        return samples.front();
    if (t >= times.back())
        return samples.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    const std::size_t lo = hi - 1;
    const double span = times[hi] - times[lo];
    const double u = (t - times[lo]) / span;
    return (1.0 - u) * samples[lo] + u * samples[hi];
}

} // namespace

int SensorNetwork::total_qubits() const {
    int total = 0;
    for (const auto& node : nodes)
        total += node.qubit_count;
    return total;
}

int SensorNetwork::qubit_offset(int k) const {
    if (k < 0 || k >= node_count())
        throw std::invalid_argument("node index out of range");
    int offset = 0;
    for (int i = 0; i < k; ++i)
        offset += nodes[i].qubit_count;
    return offset;
}

void validate_network(const SensorNetwork& net) {
    if (net.nodes.empty())
        throw std::invalid_argument("network needs at least one node");
    if (net.parameter_count < 1)
        throw std::invalid_argument("network needs at least one parameter");
    for (const auto& node : net.nodes) {
        if (node.qubit_count < 1)
            throw std::invalid_argument("each node needs at least one qubit");
        if (!node.field.evaluate)
            throw std::invalid_argument("node is missing a field function");
    }
    if (net.total_qubits() > max_qubits)
        throw std::invalid_argument("network exceeds " +
                                    std::to_string(max_qubits) + " qubits");
}

FieldFunction constant_z_field(int j) {
    FieldFunction f;
    f.evaluate = [j](const ParameterPoint& x, double) {
        check_parameter_index(j, x);
        return PauliVector(0.0, 0.0, x[j]);
    };
    f.analytic_partial = [j](int jj, const ParameterPoint& x, double) {
        check_parameter_index(j, x);
        return jj == j ? PauliVector(0.0, 0.0, 1.0) : PauliVector::Zero().eval();
    };
    return f;
}

FieldFunction angle_field(int j) {
    FieldFunction f;
    f.evaluate = [j](const ParameterPoint& x, double) {
        check_parameter_index(j, x);
        return PauliVector(std::sin(x[j]), 0.0, std::cos(x[j]));
    };
    f.analytic_partial = [j](int jj, const ParameterPoint& x, double) {
        check_parameter_index(j, x);
        if (jj != j)
            return PauliVector::Zero().eval();
        return PauliVector(std::cos(x[j]), 0.0, -std::sin(x[j])).eval();
    };
    return f;
}

FieldFunction ac_field(int j) {
    FieldFunction f;
    f.evaluate = [j](const ParameterPoint& x, double t) {
        check_parameter_index(j, x);
        return PauliVector(0.0, 0.0, std::sin(x[j] * t));
    };
    f.analytic_partial = [j](int jj, const ParameterPoint& x, double t) {
        check_parameter_index(j, x);
        if (jj != j)
            return PauliVector::Zero().eval();
        return PauliVector(0.0, 0.0, t * std::cos(x[j] * t)).eval();
    };
    return f;
}

FieldFunction tabulated_field(int j, std::vector<double> times,
                              std::vector<PauliVector> samples) {
    if (times.size() < 2 || times.size() != samples.size())
        throw std::invalid_argument(
            "tabulated field needs matching time and sample arrays, length >= 2");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("tabulated times must increase strictly");

    auto shape = [times = std::move(times),
                  samples = std::move(samples)](double t) {
        return interpolate(times, samples, t);
    };
    FieldFunction f;
    f.evaluate = [j, shape](const ParameterPoint& x, double t) {
        check_parameter_index(j, x);
        return (x[j] * shape(t)).eval();
    };
    f.analytic_partial = [j, shape](int jj, const ParameterPoint& x, double t) {
        check_parameter_index(j, x);
        return jj == j ? shape(t) : PauliVector::Zero().eval();
    };
    return f;
}

CMatrix free_hamiltonian(const SensorNetwork& net, const ParameterPoint& x,
                         double t) {
    validate_network(net);
    const int qubits = net.total_qubits();
    const int dim = 1 << qubits;
    CMatrix h = CMatrix::Zero(dim, dim);
    for (int k = 0; k < net.node_count(); ++k) {
        const PauliVector f = net.nodes[k].field.evaluate(x, t);
        const Matrix2c local = pauli_dot(f);
        const int offset = net.qubit_offset(k);
        for (int i = 0; i < net.nodes[k].qubit_count; ++i)
            h += embed_local(local, offset + i, qubits);
    }
    return h;
}

PauliVector partial_field(const SensorNetwork& net, int k, int j,
                          const ParameterPoint& x, double t, double step) {
    if (k < 0 || k >= net.node_count())
        throw std::invalid_argument("node index out of range");
    if (j < 0 || j >= net.parameter_count || j >= x.size())
        throw std::invalid_argument("parameter index out of range");
    const FieldFunction& field = net.nodes[k].field;
    if (field.analytic_partial)
        return field.analytic_partial(j, x, t);

    if (!(step > 0.0))
        throw std::invalid_argument("finite-difference step must be positive");
    const double delta = step * std::max(1.0, std::abs(x[j]));
    ParameterPoint xp = x;
    ParameterPoint xm = x;
    xp[j] += delta;
    xm[j] -= delta;
    return (field.evaluate(xp, t) - field.evaluate(xm, t)) / (2.0 * delta);
}

PauliVector v_operator(const SensorNetwork& net, int k, int i,
                       const ParameterPoint& x, double t,
                       const WeightVector& w) {
    if (k < 0 || k >= net.node_count())
        throw std::invalid_argument("node index out of range");
    if (i < 0 || i >= net.nodes[k].qubit_count)
        throw std::invalid_argument("qubit index out of range for node");
    if (w.size() != net.parameter_count)
        throw std::invalid_argument("weight vector length mismatch");
    PauliVector v = PauliVector::Zero();
    for (int j = 0; j < net.parameter_count; ++j)
        v += w[j] * partial_field(net, k, j, x, t);
    return v;
}

double v_magnitude_integral(const SensorNetwork& net, int k, int i,
                            const ParameterPoint& x, const WeightVector& w,
                            const TimeGrid& grid) {
    double total = 0.0;
    for (int m = 0; m < grid.steps; ++m)
        total += v_operator(net, k, i, x, grid.midpoint(m), w).norm();
    return total * grid.dt();
}

} // namespace dqm
