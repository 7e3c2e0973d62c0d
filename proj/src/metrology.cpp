#include <dqm/metrology.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dqm {

namespace {

double fidelity_qfi_impl(const SensorNetwork& net, const ParameterPoint& x,
                         const ControlProtocol* control, const TimeGrid& grid,
                         const CVector& probe, const RealVector& direction,
                         double eps) {
    validate_network(net);
    if (!(eps > 0.0))
        throw std::invalid_argument("eps must be positive");
    if (direction.size() != net.parameter_count)
        throw std::invalid_argument("direction length mismatch");
    if (std::abs(direction.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("direction must be a unit vector");
    if (probe.size() != (1 << net.total_qubits()))
        throw std::invalid_argument("probe dimension mismatch");
    if (std::abs(probe.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("probe must be normalized");

    auto state_at = [&](const ParameterPoint& p) {
        const CMatrix u = control ? final_propagator(net, p, *control, grid)
                                  : final_propagator(net, p, grid);
        return CVector(u * probe);
    };

    const CVector base = state_at(x);
    auto curvature = [&](double e) {
        const CVector shifted = state_at(x + e * direction);
        const double overlap = std::abs(base.dot(shifted));
        return 8.0 * (1.0 - overlap) / (e * e);
    };

    const double coarse = curvature(eps);
    const double fine = curvature(0.5 * eps);
    const double scale = std::max(std::abs(fine), 1e-9);
    if (std::abs(coarse - fine) > 0.01 * scale)
        throw std::runtime_error(
            "overlap curvature not converged; eps too large");
    return fine;
}

} // namespace

QFIM qfim(const CVector& state, const GeneratorSet& gens) {
    const auto n = static_cast<Eigen::Index>(gens.per_parameter.size());
    if (n == 0)
        throw std::invalid_argument("empty generator set");
    if (gens.per_parameter.front().rows() != state.size())
        throw std::invalid_argument("state and generator dimension mismatch");
    if (std::abs(state.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("state must be normalized");

    std::vector<CVector> applied(static_cast<std::size_t>(n));
    RealVector means(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = gens.per_parameter[static_cast<std::size_t>(i)];
        if (s.rows() != state.size() || s.cols() != state.size())
            throw std::invalid_argument("generator dimension mismatch");
        applied[static_cast<std::size_t>(i)] = s * state;
        means[i] = state.dot(applied[static_cast<std::size_t>(i)]).real();
    }

    QFIM j(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a; b < n; ++b) {
            const double cross = applied[static_cast<std::size_t>(a)]
                                     .dot(applied[static_cast<std::size_t>(b)])
                                     .real();
            const double value = 4.0 * (cross - means[a] * means[b]);
            j(a, b) = value;
            j(b, a) = value;
        }

    Eigen::SelfAdjointEigenSolver<QFIM> solver(j, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("QFIM eigenvalue computation failed");
    if (solver.eigenvalues().minCoeff() < -1e-8)
        throw std::runtime_error("QFIM is not positive semidefinite");
    return j;
}

double effective_qfi(const QFIM& j, const WeightVector& w) {
    if (j.rows() != w.size() || j.cols() != w.size())
        throw std::invalid_argument("weight vector size mismatch");
    const double value = w.dot(j * w);
    if (value < 0.0) {
        if (value < -1e-8)
            throw std::runtime_error("effective information came out negative");
        return 0.0;
    }
    return value;
}

double qfi_upper_bound(const SensorNetwork& net, const ParameterPoint& x,
                       const WeightVector& w, const TimeGrid& grid) {
    validate_network(net);
    double total = 0.0;
    for (int k = 0; k < net.node_count(); ++k)
        for (int i = 0; i < net.nodes[k].qubit_count; ++i)
            total += v_magnitude_integral(net, k, i, x, w, grid);
    return 4.0 * total * total;
}

double precision_bound(double j_eff, const WeightVector& w, int mu) {
    if (mu < 1)
        throw std::invalid_argument("repetition count must be at least 1");
    if (w.squaredNorm() == 0.0)
        throw std::invalid_argument("weight vector must be nonzero");
    if (!(j_eff > 0.0))
        return std::numeric_limits<double>::infinity();
    return w.squaredNorm() / (mu * j_eff);
}

PrecisionReport make_precision_report(double j_eff, double upper_bound,
                                      const WeightVector& w, int mu) {
    if (j_eff > upper_bound * (1.0 + 1e-6))
        throw std::runtime_error("effective information exceeds its ceiling");
    PrecisionReport report;
    report.effective_qfi = j_eff;
    report.upper_bound = upper_bound;
    report.variance_bound = precision_bound(j_eff, w, mu);
    report.repetitions = mu;
    return report;
}

double fidelity_qfi_oracle(const SensorNetwork& net, const ParameterPoint& x,
                           const TimeGrid& grid, const CVector& probe,
                           const RealVector& direction, double eps) {
    return fidelity_qfi_impl(net, x, nullptr, grid, probe, direction, eps);
}

double fidelity_qfi_oracle(const SensorNetwork& net, const ParameterPoint& x,
                           const ControlProtocol& control, const TimeGrid& grid,
                           const CVector& probe, const RealVector& direction,
                           double eps) {
    return fidelity_qfi_impl(net, x, &control, grid, probe, direction, eps);
}

double classical_fisher(const std::function<RealVector(double)>& probabilities,
                        double theta0, double dtheta) {
    if (!(dtheta > 0.0))
        throw std::invalid_argument("dtheta must be positive");
    if (!probabilities)
        throw std::invalid_argument("missing probability function");

    const RealVector center = probabilities(theta0);
    const RealVector plus = probabilities(theta0 + dtheta);
    const RealVector minus = probabilities(theta0 - dtheta);
    if (plus.size() != center.size() || minus.size() != center.size())
        throw std::invalid_argument("outcome count changed with theta");

    for (const RealVector* p : {&center, &plus, &minus}) {
        if (p->minCoeff() < -1e-12)
            throw std::invalid_argument("negative probability");
        if (std::abs(p->sum() - 1.0) > 1e-9)
            throw std::invalid_argument("probabilities do not sum to one");
    }

    double fisher = 0.0;
    for (Eigen::Index m = 0; m < center.size(); ++m) {
        if (center[m] < 1e-12)
            continue;
        const double slope = (plus[m] - minus[m]) / (2.0 * dtheta);
        fisher += slope * slope / center[m];
    }
    return fisher;
}

std::vector<PauliVector> local_bloch_components(const CMatrix& op, int qubits) {
    if (qubits < 1 || qubits > max_qubits)
        throw std::invalid_argument("qubit count out of range");
    const Eigen::Index dim = Eigen::Index{1} << qubits;
    if (op.rows() != dim || op.cols() != dim)
        throw std::invalid_argument("operator dimension mismatch");

    const Matrix2c paulis[3] = {pauli_x(), pauli_y(), pauli_z()};
    std::vector<PauliVector> components;
    components.reserve(static_cast<std::size_t>(qubits));
    for (int q = 0; q < qubits; ++q) {
        PauliVector c;
        for (int a = 0; a < 3; ++a)
            c[a] = (op * embed_local(paulis[a], q, qubits)).trace().real() /
                   static_cast<double>(dim);
        components.push_back(c);
    }
    return components;
}

} // namespace dqm
