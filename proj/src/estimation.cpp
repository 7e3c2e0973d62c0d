#include <dqm/estimation.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

#include <dqm/rng.hpp>
#include <dqm/scenarios.hpp>

namespace dqm {

namespace {

using cplx = std::complex<double>;

constexpr double infinity = std::numeric_limits<double>::infinity();

Matrix2c basis_matrix(LocalBasis basis) {
    const double s = 1.0 / std::sqrt(2.0);
    Matrix2c m;
    switch (basis) {
    case LocalBasis::x:
        m << cplx(s), cplx(s), cplx(s), cplx(-s);
        break;
    case LocalBasis::y:
        m << cplx(s), cplx(s), cplx(0, s), cplx(0, -s);
        break;
    case LocalBasis::z:
        m = Matrix2c::Identity();
        break;
    }
    return m;
}

RealVector to_real(const std::vector<std::int64_t>& counts) {
    RealVector out(static_cast<Eigen::Index>(counts.size()));
    for (std::size_t i = 0; i < counts.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = static_cast<double>(counts[i]);
    return out;
}

struct QuadratureModel {
    SensorNetwork net;
    TimeGrid grid;
    CVector probe;
    MeasurementSpec meas_x;
    MeasurementSpec meas_y;

    RealVector operator()(const ParameterPoint& x) const {
        const CVector psi = final_propagator(net, x, grid) * probe;
        const RealVector px = outcome_distribution(psi, meas_x);
        const RealVector py = outcome_distribution(psi, meas_y);
        RealVector both(px.size() + py.size());
        both << 0.5 * px, 0.5 * py;
        return both;
    }
};

QuadratureModel quadrature_model(const SensorNetwork& net,
                                 const TimeGrid& grid) {
    const int qubits = net.total_qubits();
    QuadratureModel model{net, grid,
                          make_probe({ProbeKind::product, qubits, {}}),
                          MeasurementSpec{}, MeasurementSpec{}};
    model.meas_x.bases.assign(static_cast<std::size_t>(qubits),
                              LocalBasis::x);
    model.meas_y.bases.assign(static_cast<std::size_t>(qubits),
                              LocalBasis::y);
    return model;
}

} // namespace

CVector make_probe(const ProbeSpec& spec) {
    if (spec.qubits < 1 || spec.qubits > max_qubits)
        throw std::invalid_argument("qubit count out of range");
    const Eigen::Index dim = Eigen::Index{1} << spec.qubits;
    const double s = 1.0 / std::sqrt(2.0);

    switch (spec.kind) {
    case ProbeKind::ghz: {
        CVector psi = CVector::Zero(dim);
        psi[0] = s;
        psi[dim - 1] = s;
        return psi;
    }
    case ProbeKind::bell_singlet: {
        if (spec.qubits != 2)
            throw std::invalid_argument("singlet probe needs two qubits");
        CVector psi = CVector::Zero(4);
        psi[1] = s;
        psi[2] = -s;
        return psi;
    }
    case ProbeKind::product:
        return CVector::Constant(dim, cplx(std::pow(2.0, -0.5 * spec.qubits)));
    case ProbeKind::custom: {
        if (spec.amplitudes.size() != dim)
            throw std::invalid_argument("amplitude length mismatch");
        const double norm = spec.amplitudes.norm();
        if (norm < 1e-12)
            throw std::invalid_argument("custom amplitudes have zero norm");
        return spec.amplitudes / norm;
    }
    }
    throw std::invalid_argument("unknown probe kind");
}

MeasurementSpec default_measurement(int qubits) {
    if (qubits < 1 || qubits > max_qubits)
        throw std::invalid_argument("qubit count out of range");
    MeasurementSpec meas;
    meas.bases.assign(static_cast<std::size_t>(qubits), LocalBasis::x);
    meas.bases.back() = LocalBasis::y;
    return meas;
}

RealVector outcome_distribution(const CVector& state,
                                const MeasurementSpec& meas) {
    const int qubits = meas.qubit_count();
    if (qubits < 1 || qubits > max_qubits)
        throw std::invalid_argument("qubit count out of range");
    const Eigen::Index dim = Eigen::Index{1} << qubits;
    if (state.size() != dim)
        throw std::invalid_argument("state dimension mismatch");
    if (!meas.frames.empty() &&
        static_cast<int>(meas.frames.size()) != qubits)
        throw std::invalid_argument("frame count mismatch");
    if (std::abs(state.squaredNorm() - 1.0) > 1e-8)
        throw std::invalid_argument("state is not normalized");

    CMatrix change = CMatrix::Identity(1, 1);
    for (int q = 0; q < qubits; ++q) {
        Matrix2c b = basis_matrix(meas.bases[static_cast<std::size_t>(q)]);
        if (!meas.frames.empty())
            b = meas.frames[static_cast<std::size_t>(q)] * b;
        change = Eigen::kroneckerProduct(change, b).eval();
    }
    return (change.adjoint() * state).cwiseAbs2();
}

CVector apply_local_rotations(const CVector& state,
                              const std::vector<Matrix2c>& frames) {
    const int qubits = static_cast<int>(frames.size());
    if (qubits < 1 || qubits > max_qubits)
        throw std::invalid_argument("frame count out of range");
    if (state.size() != (Eigen::Index{1} << qubits))
        throw std::invalid_argument("state dimension mismatch");
    CMatrix rot = CMatrix::Identity(1, 1);
    for (const auto& f : frames)
        rot = Eigen::kroneckerProduct(rot, f).eval();
    return rot * state;
}

std::vector<std::int64_t> sample_shots(const RealVector& dist, std::int64_t mu,
                                       std::uint64_t seed,
                                       std::uint64_t stream) {
    if (mu < 1)
        throw std::invalid_argument("shot count must be positive");
    if (dist.size() < 1)
        throw std::invalid_argument("empty distribution");
    if (dist.minCoeff() < -1e-12)
        throw std::invalid_argument("negative probability");
    const double total = dist.sum();
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("probabilities do not sum to one");

    std::vector<double> cdf(static_cast<std::size_t>(dist.size()));
    double running = 0.0;
    for (Eigen::Index m = 0; m < dist.size(); ++m) {
        running += std::max(dist[m], 0.0) / total;
        cdf[static_cast<std::size_t>(m)] = running;
    }
    cdf.back() = 1.0;

    std::vector<std::int64_t> counts(cdf.size(), 0);
    for (std::int64_t i = 0; i < mu; ++i) {
        const double u =
            keyed_uniform(seed, stream, static_cast<std::uint64_t>(i));
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t idx = std::min(
            static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
        ++counts[idx];
    }
    return counts;
}

EstimationResult estimate_theta(
    const RealVector& counts,
    const std::function<RealVector(double)>& probabilities, double window_lo,
    double window_hi) {
    if (!probabilities)
        throw std::invalid_argument("missing probability model");
    if (!std::isfinite(window_lo) || !std::isfinite(window_hi) ||
        !(window_hi > window_lo))
        throw std::invalid_argument("invalid window");
    if (counts.size() < 1 || counts.minCoeff() < 0.0)
        throw std::invalid_argument("invalid counts");
    const double total = counts.sum();
    if (!(total > 0.0))
        throw std::invalid_argument("no counts");

    auto loglike = [&](double theta) -> double {
        const RealVector p = probabilities(theta);
        if (p.size() != counts.size())
            throw std::invalid_argument("outcome count mismatch");
        double value = 0.0;
        for (Eigen::Index m = 0; m < p.size(); ++m) {
            if (counts[m] <= 0.0)
                continue;
            if (p[m] <= 0.0)
                return -infinity;
            value += counts[m] * std::log(p[m]);
        }
        return value;
    };

    const int coarse = 65;
    const double width = window_hi - window_lo;
    std::vector<double> grid_theta(coarse);
    std::vector<double> grid_value(coarse);
    int best = 0;
    for (int i = 0; i < coarse; ++i) {
        grid_theta[static_cast<std::size_t>(i)] =
            window_lo + width * i / (coarse - 1);
        grid_value[static_cast<std::size_t>(i)] =
            loglike(grid_theta[static_cast<std::size_t>(i)]);
        if (grid_value[static_cast<std::size_t>(i)] >
            grid_value[static_cast<std::size_t>(best)])
            best = i;
    }
    const double vmax = grid_value[static_cast<std::size_t>(best)];
    if (!std::isfinite(vmax))
        throw std::runtime_error("likelihood vanishes across the window");
    const double vmin =
        *std::min_element(grid_value.begin(), grid_value.end());
    if (std::isfinite(vmin) && vmax - vmin <= 1e-9 * (1.0 + std::abs(vmax)))
        throw std::runtime_error("likelihood is flat across the window");

    double a = grid_theta[static_cast<std::size_t>(std::max(best - 1, 0))];
    double b = grid_theta[static_cast<std::size_t>(
        std::min(best + 1, coarse - 1))];
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    const double tol = 1e-6 * width;
    double c = b - golden * (b - a);
    double d = a + golden * (b - a);
    double fc = loglike(c);
    double fd = loglike(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - golden * (b - a);
            fc = loglike(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + golden * (b - a);
            fd = loglike(d);
        }
    }
    const double theta_hat = 0.5 * (a + b);

    const double h = 1e-4 * width;
    const double center =
        std::clamp(theta_hat, window_lo + h, window_hi - h);
    const double f0 = loglike(center);
    const double fp = loglike(center + h);
    const double fm = loglike(center - h);
    double variance = infinity;
    if (std::isfinite(f0) && std::isfinite(fp) && std::isfinite(fm)) {
        const double info = -(fp - 2.0 * f0 + fm) / (h * h);
        if (info > 0.0)
            variance = 1.0 / info;
    }

    EstimationResult result;
    result.theta_hat = theta_hat;
    result.sample_variance = variance;
    result.shots = std::llround(total);
    return result;
}

CombinationScan combination_scan(const SensorNetwork& net,
                                 const ParameterPoint& x_hat,
                                 const WeightVector& w, const ProbeSpec& probe,
                                 const ControlProtocol& protocol,
                                 const TimeGrid& grid) {
    validate_network(net);
    if (w.size() != net.parameter_count)
        throw std::invalid_argument("weight length mismatch");
    if (w.norm() < 1e-12)
        throw std::invalid_argument("weights vanish");
    const int qubits = net.total_qubits();

    const PropagatorSchedule schedule = propagate(net, x_hat, protocol, grid);
    GeneratorSet gens = generators(net, x_hat, w, schedule, grid);

    std::vector<Matrix2c> frames(static_cast<std::size_t>(qubits),
                                 Matrix2c::Identity());
    ProbeSpec local = probe;
    local.qubits = qubits;
    CVector probe_state;
    if (local.kind == ProbeKind::ghz) {
        const auto axes = local_bloch_components(gens.combined, qubits);
        std::vector<Matrix2c> align(static_cast<std::size_t>(qubits),
                                    Matrix2c::Identity());
        for (int q = 0; q < qubits; ++q)
            if (axes[static_cast<std::size_t>(q)].norm() > 1e-12)
                align[static_cast<std::size_t>(q)] =
                    rotation_to_z(axes[static_cast<std::size_t>(q)])
                        .adjoint();
        probe_state = apply_local_rotations(make_probe(local), align);
        // the parity readout must follow each qubit through the
        // working-point evolution, not just the generator axis
        frames = align;
        if (schedule.local)
            for (int m = 0; m < grid.steps; ++m)
                for (int q = 0; q < qubits; ++q)
                    frames[static_cast<std::size_t>(q)] =
                        schedule
                            .qubit_steps[static_cast<std::size_t>(m)]
                                        [static_cast<std::size_t>(q)] *
                        frames[static_cast<std::size_t>(q)];
    } else {
        probe_state = make_probe(local);
    }
    MeasurementSpec meas = default_measurement(qubits);
    meas.frames = frames;

    const WeightVector unit = w / w.norm();
    const double info_unit = effective_qfi(qfim(probe_state, gens), unit);
    const double half_width =
        info_unit > 1e-9 ? M_PI / (2.0 * std::sqrt(info_unit)) : 1.0;

    auto distribution = [net, x_hat, unit, protocol, grid, probe_state,
                         meas](double theta) {
        const ParameterPoint x = x_hat + unit * theta;
        return outcome_distribution(
            final_propagator(net, x, protocol, grid) * probe_state, meas);
    };
    return CombinationScan{std::move(distribution), std::move(probe_state),
                           std::move(meas),         protocol,
                           std::move(gens),         half_width};
}

CombinationScan combination_scan(const SensorNetwork& net,
                                 const ParameterPoint& x_hat,
                                 const WeightVector& w, const ProbeSpec& probe,
                                 ControlStrategy strategy,
                                 const TimeGrid& grid) {
    return combination_scan(net, x_hat, w, probe,
                            synthesize_control(net, x_hat, w, strategy, grid),
                            grid);
}

EstimationResult adaptive_estimate(const Scenario& scenario,
                                   std::int64_t stage1_shots,
                                   std::int64_t final_shots, int rounds,
                                   std::uint64_t seed) {
    validate_network(scenario.network);
    if (rounds < 1)
        throw std::invalid_argument("round count must be positive");
    if (final_shots < 1)
        throw std::invalid_argument("final shot budget must be positive");
    if (stage1_shots < 0)
        throw std::invalid_argument("negative stage-1 budget");

    const auto& settings = scenario.estimation;
    const int d = scenario.network.parameter_count;
    const TimeGrid grid(settings.horizon,
                        scenario.grid_steps(settings.horizon));
    const WeightVector unit = scenario.weights / scenario.weights.norm();
    const bool controlled = scenario.control != ControlStrategy::none;

    EstimationResult out;
    ParameterPoint x_hat = scenario.start;
    std::int64_t used = 0;

    if (controlled) {
        const std::int64_t per = stage1_shots / (2 * d);
        if (per < 1)
            throw std::invalid_argument("stage-1 shot budget too small");
        const auto model = quadrature_model(scenario.network, grid);
        const RealVector truth_dist = model(scenario.truth);
        const Eigen::Index half = truth_dist.size() / 2;
        for (int j = 0; j < d; ++j) {
            const auto cx = sample_shots(
                (truth_dist.head(half) * 2.0).eval(), per, seed,
                100 + 2 * static_cast<std::uint64_t>(j));
            const auto cy = sample_shots(
                (truth_dist.tail(half) * 2.0).eval(), per, seed,
                101 + 2 * static_cast<std::uint64_t>(j));
            RealVector counts(2 * half);
            counts << to_real(cx), to_real(cy);

            const ParameterPoint frozen = x_hat;
            const double center = scenario.start[j];
            auto family = [model, frozen, center, j](double shift) {
                ParameterPoint x = frozen;
                x[j] = center + shift;
                return model(x);
            };
            const auto est =
                estimate_theta(counts, family, -settings.stage1_half_width,
                               settings.stage1_half_width);
            x_hat[j] = center + est.theta_hat;
            used += 2 * per;
            out.trace.push_back({0, "separable", x_hat, 2 * per,
                                 est.theta_hat, est.sample_variance});
        }
    }

    const std::int64_t stage1_spent = used;
    const int entangled_rounds = controlled ? rounds : 1;
    double final_variance = infinity;
    for (int r = 1; r <= entangled_rounds; ++r) {
        const auto scan =
            combination_scan(scenario.network, x_hat, scenario.weights,
                             scenario.probe, scenario.control, grid);
        const CVector truth_state =
            final_propagator(scenario.network, scenario.truth, scan.protocol,
                             grid) *
            scan.probe;
        const RealVector truth_dist =
            outcome_distribution(truth_state, scan.measurement);
        const std::int64_t batch =
            r == entangled_rounds
                ? final_shots + (stage1_shots - stage1_spent)
                : stage1_shots;
        const auto counts = sample_shots(truth_dist, batch, seed,
                                         1000 + static_cast<std::uint64_t>(r));
        const auto est =
            estimate_theta(to_real(counts), scan.distribution,
                           -scan.half_width, scan.half_width);
        x_hat += unit * est.theta_hat;
        used += batch;
        final_variance = est.sample_variance;
        out.trace.push_back({r, control_tag(scenario.control), x_hat, batch,
                             unit.dot(x_hat), est.sample_variance});
    }

    out.theta_hat = unit.dot(x_hat);
    out.sample_variance = final_variance;
    out.shots = used;
    return out;
}

EstimationResult separable_estimate(const Scenario& scenario,
                                    std::int64_t shots, std::uint64_t seed) {
    validate_network(scenario.network);
    if (shots < 2)
        throw std::invalid_argument("shot budget too small");

    const auto& settings = scenario.estimation;
    const int d = scenario.network.parameter_count;
    const TimeGrid grid(settings.horizon,
                        scenario.grid_steps(settings.horizon));
    const WeightVector unit = scenario.weights / scenario.weights.norm();

    const auto model = quadrature_model(scenario.network, grid);
    const RealVector truth_dist = model(scenario.truth);
    const Eigen::Index half = truth_dist.size() / 2;
    const std::int64_t mu_x = shots / 2;
    const std::int64_t mu_y = shots - mu_x;
    const auto cx =
        sample_shots((truth_dist.head(half) * 2.0).eval(), mu_x, seed, 7);
    const auto cy =
        sample_shots((truth_dist.tail(half) * 2.0).eval(), mu_y, seed, 8);
    RealVector counts(2 * half);
    counts << to_real(cx), to_real(cy);

    EstimationResult out;
    ParameterPoint x_hat = scenario.start;
    double combined_variance = 0.0;
    for (int j = 0; j < d; ++j) {
        const ParameterPoint frozen = x_hat;
        const double center = scenario.start[j];
        auto family = [model, frozen, center, j](double shift) {
            ParameterPoint x = frozen;
            x[j] = center + shift;
            return model(x);
        };
        const auto est =
            estimate_theta(counts, family, -settings.stage1_half_width,
                           settings.stage1_half_width);
        x_hat[j] = center + est.theta_hat;
        combined_variance += unit[j] * unit[j] * est.sample_variance;
        out.trace.push_back({0, "separable", x_hat, shots, est.theta_hat,
                             est.sample_variance});
    }

    out.theta_hat = unit.dot(x_hat);
    out.sample_variance = combined_variance;
    out.shots = shots;
    return out;
}

} // namespace dqm
