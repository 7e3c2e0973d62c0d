#include <dqm/dynamics.hpp>

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <stdexcept>

namespace dqm {

namespace {

void check_control(const SensorNetwork& net, const ControlProtocol& control,
                   const TimeGrid& grid) {
    if (control.grid.steps != grid.steps ||
        std::abs(control.grid.total_time - grid.total_time) > 1e-12)
        throw std::invalid_argument("control protocol grid does not match");
    if (control.qubit_count() != net.total_qubits())
        throw std::invalid_argument("control protocol qubit count mismatch");
}

// Total single-qubit step Hamiltonians h[q] at one midpoint.
std::vector<PauliVector> step_fields(const SensorNetwork& net,
                                     const ParameterPoint& x, double t,
                                     const ControlProtocol* control, int m) {
    std::vector<PauliVector> h(static_cast<std::size_t>(net.total_qubits()));
    for (int k = 0; k < net.node_count(); ++k) {
        const PauliVector f = net.nodes[k].field.evaluate(x, t);
        const int offset = net.qubit_offset(k);
        for (int i = 0; i < net.nodes[k].qubit_count; ++i) {
            const auto q = static_cast<std::size_t>(offset + i);
            h[q] = f;
            if (control)
                h[q] += control->steps[static_cast<std::size_t>(m)][q];
        }
    }
    return h;
}

CMatrix assemble(const std::vector<PauliVector>& fields) {
    const int qubits = static_cast<int>(fields.size());
    const int dim = 1 << qubits;
    CMatrix h = CMatrix::Zero(dim, dim);
    for (int q = 0; q < qubits; ++q)
        h += embed_local(pauli_dot(fields[static_cast<std::size_t>(q)]), q,
                         qubits);
    return h;
}

bool fields_constant(const std::vector<std::vector<PauliVector>>& per_step) {
    for (std::size_t m = 1; m < per_step.size(); ++m)
        for (std::size_t q = 0; q < per_step[m].size(); ++q) {
            const double scale =
                std::max(1.0, per_step.front()[q].norm());
            if ((per_step[m][q] - per_step.front()[q]).norm() > 1e-13 * scale)
                return false;
        }
    return true;
}

PropagatorSchedule propagate_impl(const SensorNetwork& net,
                                  const ParameterPoint& x,
                                  const ControlProtocol* control,
                                  const TimeGrid& grid) {
    validate_network(net);
    if (control)
        check_control(net, *control, grid);

    const int qubits = net.total_qubits();
    const int dim = 1 << qubits;
    const double dt = grid.dt();

    PropagatorSchedule schedule(grid);
    schedule.step_unitaries.reserve(static_cast<std::size_t>(grid.steps));
    schedule.midpoint_products.reserve(static_cast<std::size_t>(grid.steps));
    schedule.qubit_steps.reserve(static_cast<std::size_t>(grid.steps));

    CMatrix u_end = CMatrix::Identity(dim, dim);
    bool local = true;
    for (int m = 0; m < grid.steps; ++m) {
        const auto fields = step_fields(net, x, grid.midpoint(m), control, m);
        const CMatrix h = assemble(fields);
        const CMatrix step = step_unitary(h, dt);

        std::vector<Matrix2c> factors(fields.size());
        CMatrix product = CMatrix::Identity(1, 1);
        for (std::size_t q = 0; q < fields.size(); ++q) {
            factors[q] = su2_exponential(fields[q], dt);
            product = Eigen::kroneckerProduct(product, factors[q]).eval();
        }
        if ((step - product).cwiseAbs().maxCoeff() > 1e-10)
            local = false;

        schedule.midpoint_products.push_back(step_unitary(h, 0.5 * dt) * u_end);
        u_end = step * u_end;
        schedule.step_unitaries.push_back(step);
        schedule.qubit_steps.push_back(std::move(factors));
    }
    schedule.total = u_end;
    schedule.local = local;
    if (!local)
        schedule.qubit_steps.clear();
    return schedule;
}

CMatrix final_impl(const SensorNetwork& net, const ParameterPoint& x,
                   const ControlProtocol* control, const TimeGrid& grid) {
    validate_network(net);
    if (control)
        check_control(net, *control, grid);

    std::vector<std::vector<PauliVector>> per_step(
        static_cast<std::size_t>(grid.steps));
    for (int m = 0; m < grid.steps; ++m)
        per_step[static_cast<std::size_t>(m)] =
            step_fields(net, x, grid.midpoint(m), control, m);

    if (fields_constant(per_step)) {
        const CMatrix h = assemble(per_step.front());
        if (h.cwiseAbs().maxCoeff() == 0.0)
            return CMatrix::Identity(h.rows(), h.cols());
        return step_unitary(h, grid.total_time);
    }

    const int dim = 1 << net.total_qubits();
    CMatrix u = CMatrix::Identity(dim, dim);
    const double dt = grid.dt();
    for (int m = 0; m < grid.steps; ++m)
        u = step_unitary(assemble(per_step[static_cast<std::size_t>(m)]), dt) *
            u;
    return u;
}

} // namespace

PropagatorSchedule propagate(const SensorNetwork& net, const ParameterPoint& x,
                             const TimeGrid& grid) {
    return propagate_impl(net, x, nullptr, grid);
}

PropagatorSchedule propagate(const SensorNetwork& net, const ParameterPoint& x,
                             const ControlProtocol& control,
                             const TimeGrid& grid) {
    return propagate_impl(net, x, &control, grid);
}

GeneratorSet generators(const SensorNetwork& net, const ParameterPoint& x,
                        const WeightVector& w,
                        const PropagatorSchedule& schedule,
                        const TimeGrid& grid) {
    validate_network(net);
    if (static_cast<int>(schedule.midpoint_products.size()) != grid.steps)
        throw std::invalid_argument("schedule does not cover the grid");
    if (w.size() != net.parameter_count)
        throw std::invalid_argument("weight vector length mismatch");

    const int qubits = net.total_qubits();
    const int dim = 1 << qubits;
    if (schedule.total.rows() != dim)
        throw std::invalid_argument("schedule dimension mismatch");

    const double dt = grid.dt();
    GeneratorSet out;
    out.per_parameter.assign(static_cast<std::size_t>(net.parameter_count),
                             CMatrix::Zero(dim, dim));
    for (int m = 0; m < grid.steps; ++m) {
        const CMatrix& u = schedule.midpoint_products[static_cast<std::size_t>(m)];
        const double t = grid.midpoint(m);
        for (int j = 0; j < net.parameter_count; ++j) {
            CMatrix dh = CMatrix::Zero(dim, dim);
            for (int k = 0; k < net.node_count(); ++k) {
                const PauliVector p = partial_field(net, k, j, x, t);
                if (p.norm() == 0.0)
                    continue;
                const int offset = net.qubit_offset(k);
                for (int i = 0; i < net.nodes[k].qubit_count; ++i)
                    dh += embed_local(pauli_dot(p), offset + i, qubits);
            }
            out.per_parameter[static_cast<std::size_t>(j)] +=
                dt * (u.adjoint() * dh * u);
        }
    }
    for (auto& s : out.per_parameter)
        s = hermitize(s);

    out.combined = CMatrix::Zero(dim, dim);
    for (int j = 0; j < net.parameter_count; ++j)
        out.combined += w[j] * out.per_parameter[static_cast<std::size_t>(j)];
    return out;
}

CMatrix generator_oracle(const SensorNetwork& net, const ParameterPoint& x,
                         const ControlProtocol& control, const TimeGrid& grid,
                         int j, double eps) {
    if (!(eps > 0.0))
        throw std::invalid_argument("finite-difference step must be positive");
    if (j < 0 || j >= net.parameter_count)
        throw std::invalid_argument("parameter index out of range");
    ParameterPoint xp = x;
    ParameterPoint xm = x;
    xp[j] += eps;
    xm[j] -= eps;
    const CMatrix u0 = final_impl(net, x, &control, grid);
    const CMatrix up = final_impl(net, xp, &control, grid);
    const CMatrix um = final_impl(net, xm, &control, grid);
    const CMatrix s =
        std::complex<double>(0, 1) * (u0.adjoint() * ((up - um) / (2.0 * eps)));
    return hermitize(s);
}

CMatrix generator_oracle(const SensorNetwork& net, const ParameterPoint& x,
                         const TimeGrid& grid, int j, double eps) {
    ControlProtocol idle(grid, ControlStrategy::none, net.total_qubits());
    return generator_oracle(net, x, idle, grid, j, eps);
}

CMatrix final_propagator(const SensorNetwork& net, const ParameterPoint& x,
                         const TimeGrid& grid) {
    return final_impl(net, x, nullptr, grid);
}

CMatrix final_propagator(const SensorNetwork& net, const ParameterPoint& x,
                         const ControlProtocol& control, const TimeGrid& grid) {
    return final_impl(net, x, &control, grid);
}

} // namespace dqm
