#include <dqm/control.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace dqm {

namespace {

using Cplx = std::complex<double>;

Matrix2c rot_z(double phi) {
    Matrix2c r = Matrix2c::Zero();
    r(0, 0) = std::exp(Cplx(0, -0.5 * phi));
    r(1, 1) = std::exp(Cplx(0, 0.5 * phi));
    return r;
}

double max_abs(const Matrix2c& m) { return m.cwiseAbs().maxCoeff(); }

constexpr double degenerate_speed = 1e-12;

// Largest frame increment still realized by pinning the step midpoint; larger
// jumps (axis flips) are realized across the whole step instead.
constexpr double half_step_angle_cap = 1.0;

std::vector<PauliVector> node_speeds(const SensorNetwork& net, int k,
                                     const ParameterPoint& x,
                                     const WeightVector& w,
                                     const TimeGrid& grid) {
    std::vector<PauliVector> v(static_cast<std::size_t>(grid.steps));
    for (int m = 0; m < grid.steps; ++m)
        v[static_cast<std::size_t>(m)] =
            v_operator(net, k, 0, x, grid.midpoint(m), w);
    return v;
}

void check_grid_match(const TimeGrid& a, const TimeGrid& b) {
    if (a.steps != b.steps || std::abs(a.total_time - b.total_time) > 1e-12)
        throw std::invalid_argument("protocol grid does not match request");
}

} // namespace

double ControlProtocol::max_amplitude() const {
    double peak = 0.0;
    for (const auto& row : steps)
        for (const auto& h : row)
            peak = std::max(peak, h.norm());
    return peak;
}

std::vector<bool> needs_control(const SensorNetwork& net,
                                const ParameterPoint& x, const WeightVector& w,
                                double horizon) {
    validate_network(net);
    if (!(horizon > 0.0))
        throw std::invalid_argument("horizon must be positive");
    const double probes[] = {0.0,           0.137 * horizon, 0.29 * horizon,
                             0.5 * horizon, 0.731 * horizon, 0.887 * horizon,
                             horizon};
    std::vector<bool> flags(static_cast<std::size_t>(net.node_count()), false);
    for (int k = 0; k < net.node_count(); ++k) {
        const PauliVector f0 = net.nodes[k].field.evaluate(x, probes[0]);
        bool time_dependent = false;
        for (double t : probes) {
            if ((net.nodes[k].field.evaluate(x, t) - f0).norm() > 1e-12) {
                time_dependent = true;
                break;
            }
        }
        if (time_dependent) {
            flags[static_cast<std::size_t>(k)] = true;
            continue;
        }
        const PauliVector v = v_operator(net, k, 0, x, 0.0, w);
        const double scale = std::max(1.0, f0.norm() * v.norm());
        flags[static_cast<std::size_t>(k)] = f0.cross(v).norm() > 1e-10 * scale;
    }
    return flags;
}

ControlProtocol cancel_control(const SensorNetwork& net,
                               const ParameterPoint& x_hat,
                               const TimeGrid& grid) {
    validate_network(net);
    ControlProtocol protocol(grid, ControlStrategy::cancel, net.total_qubits());
    for (int k = 0; k < net.node_count(); ++k) {
        const PauliVector f0 = net.nodes[k].field.evaluate(x_hat, grid.midpoint(0));
        for (int m = 1; m < grid.steps; ++m) {
            const PauliVector f = net.nodes[k].field.evaluate(x_hat, grid.midpoint(m));
            if ((f - f0).norm() > 1e-12 * std::max(1.0, f0.norm()))
                throw std::invalid_argument(
                    "cancel control requires a time-independent field");
        }
        const int offset = net.qubit_offset(k);
        for (int i = 0; i < net.nodes[k].qubit_count; ++i)
            for (int m = 0; m < grid.steps; ++m)
                protocol.steps[static_cast<std::size_t>(m)]
                              [static_cast<std::size_t>(offset + i)] = -f0;
    }
    return protocol;
}

AlignmentSynthesis alignment_control(const SensorNetwork& net,
                                     const ParameterPoint& x_hat,
                                     const WeightVector& w,
                                     const TimeGrid& grid,
                                     const std::vector<PauliVector>& target_axes) {
    validate_network(net);
    const int qubits = net.total_qubits();
    if (!target_axes.empty() &&
        static_cast<int>(target_axes.size()) != qubits)
        throw std::invalid_argument("need one target axis per qubit");

    ControlProtocol protocol(grid, ControlStrategy::alignment, qubits);
    double residual = 0.0;
    const double dt = grid.dt();

    for (int k = 0; k < net.node_count(); ++k) {
        const auto v = node_speeds(net, k, x_hat, w, grid);
        const int offset = net.qubit_offset(k);
        for (int i = 0; i < net.nodes[k].qubit_count; ++i) {
            const int q = offset + i;

            PauliVector axis = PauliVector::Zero();
            if (!target_axes.empty() &&
                target_axes[static_cast<std::size_t>(q)].norm() > 0.0) {
                axis = target_axes[static_cast<std::size_t>(q)].normalized();
            } else {
                for (const auto& vm : v) {
                    if (vm.norm() >= degenerate_speed) {
                        axis = vm.normalized();
                        break;
                    }
                }
            }
            const bool active = axis.norm() > 0.0;
            const Matrix2c w_axis =
                active ? rotation_to_z(axis) : Matrix2c::Identity().eval();
            const Matrix2c target_op =
                active ? Matrix2c(pauli_dot2(axis)) : Matrix2c::Identity();

            Matrix2c u_end = Matrix2c::Identity();
            for (int m = 0; m < grid.steps; ++m) {
                const std::size_t mm = static_cast<std::size_t>(m);
                const PauliVector h_free =
                    net.nodes[k].field.evaluate(x_hat, grid.midpoint(m));
                const double speed = v[mm].norm();

                PauliVector h_tot = h_free;
                if (active && speed >= degenerate_speed) {
                    const Matrix2c p = su2_exponential(h_free, 0.5 * dt) * u_end;
                    const Matrix2c w_v = rotation_to_z(v[mm]);
                    const Matrix2c kmat = w_v * p * w_axis.adjoint();
                    const Cplx s = kmat(0, 0) + std::conj(kmat(1, 1));
                    const double phi = std::abs(s) < 1e-15 ? 0.0 : -2.0 * std::arg(s);
                    const Matrix2c frame = w_v.adjoint() * rot_z(phi) * w_axis;
                    Matrix2c g = frame * u_end.adjoint();
                    PauliVector h_half = su2_log_traceless(g, 0.5 * dt);
                    if (h_half.norm() * 0.5 * dt > 0.5 * M_PI + 1e-9) {
                        // -g is the same physical rotation on a shorter branch
                        g = -g;
                        h_half = su2_log_traceless(g, 0.5 * dt);
                    }
                    if (h_half.norm() * 0.5 * dt <= half_step_angle_cap)
                        h_tot = h_half;
                    else
                        h_tot = su2_log_traceless(g, dt);
                }

                protocol.steps[mm][static_cast<std::size_t>(q)] = h_tot - h_free;

                const Matrix2c u_mid = su2_exponential(h_tot, 0.5 * dt) * u_end;
                if (speed >= degenerate_speed) {
                    const Matrix2c aligned =
                        u_mid.adjoint() * pauli_dot2(v[mm]) * u_mid;
                    residual =
                        std::max(residual, max_abs(aligned - speed * target_op));
                }
                u_end = su2_exponential(h_tot, dt) * u_end;
            }
        }
    }
    return {std::move(protocol), AlignmentResidual{residual}};
}

ControlProtocol pi_pulse_schedule(const SensorNetwork& net, int k,
                                  const ParameterPoint& x_hat,
                                  const WeightVector& w, const TimeGrid& grid) {
    validate_network(net);
    if (k < 0 || k >= net.node_count())
        throw std::invalid_argument("node index out of range");

    const auto v = node_speeds(net, k, x_hat, w, grid);
    PauliVector axis = PauliVector::Zero();
    for (const auto& vm : v) {
        if (vm.norm() >= degenerate_speed) {
            axis = vm.normalized();
            break;
        }
    }
    if (axis.norm() == 0.0)
        throw std::invalid_argument("derivative vanishes on the whole grid");

    for (int m = 0; m < grid.steps; ++m) {
        const std::size_t mm = static_cast<std::size_t>(m);
        const double scale = std::max(1.0, v[mm].norm());
        if (v[mm].cross(axis).norm() > 1e-8 * scale)
            throw std::invalid_argument("derivative axis is not fixed in time");
        const PauliVector f = net.nodes[k].field.evaluate(x_hat, grid.midpoint(m));
        if (f.cross(axis).norm() > 1e-8 * std::max(1.0, f.norm()))
            throw std::invalid_argument("field does not share the derivative axis");
    }

    PauliVector pulse_axis = PauliVector(1, 0, 0) - axis.x() * axis;
    if (pulse_axis.norm() < 0.1)
        pulse_axis = PauliVector(0, 1, 0) - axis.y() * axis;
    pulse_axis.normalize();

    ControlProtocol protocol(grid, ControlStrategy::pi_pulse, net.total_qubits());
    const double dt = grid.dt();
    const int offset = net.qubit_offset(k);
    for (int m = 0; m + 1 < grid.steps; ++m) {
        const double a = v[static_cast<std::size_t>(m)].dot(axis);
        const double b = v[static_cast<std::size_t>(m + 1)].dot(axis);
        if (!(a * b < 0.0))
            continue;
        const double t_cross = grid.midpoint(m) + dt * a / (a - b);
        const int step = std::clamp(
            static_cast<int>(std::lround(t_cross / dt - 0.5)), 0, grid.steps - 1);
        for (int i = 0; i < net.nodes[k].qubit_count; ++i)
            protocol.steps[static_cast<std::size_t>(step)]
                          [static_cast<std::size_t>(offset + i)] =
                (0.5 * M_PI / dt) * pulse_axis;
    }
    return protocol;
}

AlignmentResidual verify_protocol(const SensorNetwork& net,
                                  const ParameterPoint& x,
                                  const WeightVector& w,
                                  const ControlProtocol& protocol,
                                  const TimeGrid& grid) {
    validate_network(net);
    check_grid_match(protocol.grid, grid);
    const int qubits = net.total_qubits();
    for (const auto& row : protocol.steps)
        if (static_cast<int>(row.size()) != qubits)
            throw std::invalid_argument("protocol qubit count mismatch");

    double worst = 0.0;
    const double dt = grid.dt();
    for (int k = 0; k < net.node_count(); ++k) {
        const auto v = node_speeds(net, k, x, w, grid);
        const int offset = net.qubit_offset(k);
        for (int i = 0; i < net.nodes[k].qubit_count; ++i) {
            const int q = offset + i;
            Matrix2c u_end = Matrix2c::Identity();
            bool have_axis = false;
            Matrix2c target_op = Matrix2c::Identity();
            for (int m = 0; m < grid.steps; ++m) {
                const std::size_t mm = static_cast<std::size_t>(m);
                const PauliVector h_tot =
                    net.nodes[k].field.evaluate(x, grid.midpoint(m)) +
                    protocol.steps[mm][static_cast<std::size_t>(q)];
                const Matrix2c u_mid = su2_exponential(h_tot, 0.5 * dt) * u_end;
                const double speed = v[mm].norm();
                if (speed >= degenerate_speed) {
                    const Matrix2c aligned =
                        u_mid.adjoint() * pauli_dot2(v[mm]) * u_mid;
                    if (!have_axis) {
                        // first active step fixes the reference axis
                        target_op = aligned / speed;
                        have_axis = true;
                    }
                    worst = std::max(worst, max_abs(aligned - speed * target_op));
                }
                u_end = su2_exponential(h_tot, dt) * u_end;
            }
        }
    }
    return AlignmentResidual{worst};
}

namespace {

bool node_has_signal(const SensorNetwork& net, int k, const ParameterPoint& x,
                     const WeightVector& w, const TimeGrid& grid) {
    for (int m = 0; m < grid.steps; ++m)
        for (int i = 0; i < net.nodes[static_cast<std::size_t>(k)].qubit_count;
             ++i)
            if (v_operator(net, k, i, x, grid.midpoint(m), w).norm() >= 1e-12)
                return true;
    return false;
}

} // namespace

ControlProtocol synthesize_control(const SensorNetwork& net,
                                   const ParameterPoint& x_hat,
                                   const WeightVector& w,
                                   ControlStrategy strategy,
                                   const TimeGrid& grid) {
    switch (strategy) {
    case ControlStrategy::none:
        return ControlProtocol(grid, ControlStrategy::none,
                               net.total_qubits());
    case ControlStrategy::cancel:
        return cancel_control(net, x_hat, grid);
    case ControlStrategy::alignment:
        return alignment_control(net, x_hat, w, grid).protocol;
    case ControlStrategy::pi_pulse: {
        ControlProtocol merged(grid, ControlStrategy::pi_pulse,
                               net.total_qubits());
        for (int k = 0; k < net.node_count(); ++k) {
            if (!node_has_signal(net, k, x_hat, w, grid))
                continue;
            const ControlProtocol part =
                pi_pulse_schedule(net, k, x_hat, w, grid);
            for (int m = 0; m < grid.steps; ++m)
                for (int q = 0; q < merged.qubit_count(); ++q)
                    merged.steps[static_cast<std::size_t>(m)]
                                [static_cast<std::size_t>(q)] +=
                        part.steps[static_cast<std::size_t>(m)]
                                  [static_cast<std::size_t>(q)];
        }
        return merged;
    }
    case ControlStrategy::custom:
        break;
    }
    throw std::invalid_argument("custom strategy needs an explicit protocol");
}

const char* control_tag(ControlStrategy strategy) {
    switch (strategy) {
    case ControlStrategy::none:
        return "none";
    case ControlStrategy::cancel:
        return "cancel";
    case ControlStrategy::alignment:
        return "alignment";
    case ControlStrategy::pi_pulse:
        return "pi-pulse";
    case ControlStrategy::custom:
        return "custom";
    }
    return "unknown";
}

std::vector<ControlTableRow> protocol_table(const ControlProtocol& protocol) {
    std::vector<ControlTableRow> rows;
    rows.reserve(protocol.steps.size() *
                 static_cast<std::size_t>(protocol.qubit_count()));
    for (int m = 0; m < static_cast<int>(protocol.steps.size()); ++m)
        for (int q = 0; q < protocol.qubit_count(); ++q)
            rows.push_back({m, q,
                            protocol.steps[static_cast<std::size_t>(m)]
                                          [static_cast<std::size_t>(q)]});
    return rows;
}

ControlProtocol protocol_from_table(const std::vector<ControlTableRow>& rows,
                                    const TimeGrid& grid, int qubits,
                                    ControlStrategy strategy) {
    if (qubits < 1)
        throw std::invalid_argument("need at least one qubit");
    ControlProtocol protocol(grid, strategy, qubits);
    std::vector<std::vector<bool>> seen(
        static_cast<std::size_t>(grid.steps),
        std::vector<bool>(static_cast<std::size_t>(qubits), false));
    for (const auto& row : rows) {
        if (row.step < 0 || row.step >= grid.steps)
            throw std::invalid_argument("table step index out of range");
        if (row.qubit < 0 || row.qubit >= qubits)
            throw std::invalid_argument("table qubit index out of range");
        const auto m = static_cast<std::size_t>(row.step);
        const auto q = static_cast<std::size_t>(row.qubit);
        if (seen[m][q])
            throw std::invalid_argument("duplicate table entry");
        seen[m][q] = true;
        protocol.steps[m][q] = row.h;
    }
    for (const auto& level : seen)
        for (bool s : level)
            if (!s)
                throw std::invalid_argument("table does not cover every step");
    return protocol;
}

} // namespace dqm
