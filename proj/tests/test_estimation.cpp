#include <doctest.h>

#include <cmath>

#include <dqm/estimation.hpp>
#include <dqm/rng.hpp>
#include <dqm/scenarios.hpp>

#include "helpers.hpp"

using namespace dqm;
using cplx = std::complex<double>;

namespace {

ParameterPoint point(std::initializer_list<double> vals) {
    ParameterPoint x(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double v : vals)
        x[i++] = v;
    return x;
}

// analytic clock fringe: singlet probe, (x, y) measurement, parameters
// scanned along x(theta) = (1 + theta, 1 - theta)
RealVector clock_fringe(double t_total, double theta) {
    const double phase = 4.0 * t_total * theta;
    RealVector p(4);
    p << (1.0 + std::sin(phase)) / 4.0, (1.0 - std::sin(phase)) / 4.0,
        (1.0 - std::sin(phase)) / 4.0, (1.0 + std::sin(phase)) / 4.0;
    return p;
}

RealVector to_real_counts(const std::vector<std::int64_t>& counts) {
    RealVector out(static_cast<Eigen::Index>(counts.size()));
    for (std::size_t i = 0; i < counts.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = static_cast<double>(counts[i]);
    return out;
}

} // namespace

TEST_CASE("probe families") {
    const double s = 1.0 / std::sqrt(2.0);

    CVector ghz2 = make_probe({ProbeKind::ghz, 2, {}});
    CHECK(std::abs(ghz2[0] - cplx(s)) < 1e-15);
    CHECK(std::abs(ghz2[3] - cplx(s)) < 1e-15);
    CHECK(std::abs(ghz2[1]) + std::abs(ghz2[2]) == 0.0);

    CVector ghz3 = make_probe({ProbeKind::ghz, 3, {}});
    CHECK(ghz3.size() == 8);
    CHECK(std::abs(ghz3[0] - cplx(s)) < 1e-15);
    CHECK(std::abs(ghz3[7] - cplx(s)) < 1e-15);
    CHECK(ghz3.segment(1, 6).norm() == 0.0);

    CVector singlet = make_probe({ProbeKind::bell_singlet, 2, {}});
    CHECK(std::abs(singlet[1] - cplx(s)) < 1e-15);
    CHECK(std::abs(singlet[2] + cplx(s)) < 1e-15);

    CVector plus = make_probe({ProbeKind::product, 3, {}});
    CHECK(std::abs(plus.cwiseAbs().maxCoeff() - std::pow(2.0, -1.5)) < 1e-15);
    CHECK(std::abs(plus.norm() - 1.0) < 1e-12);

    CVector amps(4);
    amps << 2.0, 0.0, 0.0, 0.0;
    CVector custom = make_probe({ProbeKind::custom, 2, amps});
    CHECK(std::abs(custom[0] - cplx(1.0)) < 1e-15);

    CHECK_THROWS_AS(make_probe({ProbeKind::bell_singlet, 3, {}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_probe({ProbeKind::custom, 2, CVector::Zero(4)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_probe({ProbeKind::custom, 2, CVector::Ones(3)}),
                    std::invalid_argument);
}

TEST_CASE("default measurement bases") {
    auto two = default_measurement(2);
    CHECK(two.bases[0] == LocalBasis::x);
    CHECK(two.bases[1] == LocalBasis::y);

    auto one = default_measurement(1);
    CHECK(one.bases[0] == LocalBasis::y);

    auto three = default_measurement(3);
    CHECK(three.bases[0] == LocalBasis::x);
    CHECK(three.bases[1] == LocalBasis::x);
    CHECK(three.bases[2] == LocalBasis::y);

    CHECK_THROWS_AS(default_measurement(0), std::invalid_argument);
}

TEST_CASE("outcome distributions of the bell pair") {
    CVector ghz = make_probe({ProbeKind::ghz, 2, {}});

    MeasurementSpec zz;
    zz.bases = {LocalBasis::z, LocalBasis::z};
    RealVector pz = outcome_distribution(ghz, zz);
    CHECK(pz[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pz[3] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pz[1] + pz[2] < 1e-14);

    MeasurementSpec xx;
    xx.bases = {LocalBasis::x, LocalBasis::x};
    RealVector px = outcome_distribution(ghz, xx);
    CHECK(px[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(px[3] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(px[1] + px[2] < 1e-14);

    CHECK_THROWS_AS(outcome_distribution(CVector::Ones(3), xx),
                    std::invalid_argument);
    MeasurementSpec bad = xx;
    bad.frames = {Matrix2c::Identity()};
    CHECK_THROWS_AS(outcome_distribution(ghz, bad), std::invalid_argument);
}

TEST_CASE("simulated clock fringe matches the closed form") {
    SensorNetwork net;
    net.nodes.push_back({1, constant_z_field(0)});
    net.nodes.push_back({1, constant_z_field(1)});
    net.parameter_count = 2;
    const double T = 1.0;
    TimeGrid grid(T, 64);
    CVector singlet = make_probe({ProbeKind::bell_singlet, 2, {}});
    auto meas = default_measurement(2);

    for (double theta : {0.0, 0.07, -0.21}) {
        ParameterPoint x = point({1.0 + theta, 1.0 - theta});
        RealVector sim = outcome_distribution(
            final_propagator(net, x, grid) * singlet, meas);
        RealVector exact = clock_fringe(T, theta);
        CHECK((sim - exact).cwiseAbs().maxCoeff() < 1e-9);
    }

    // working point: the transverse parity has zero expectation
    RealVector p0 = outcome_distribution(
        final_propagator(net, point({1.0, 1.0}), grid) * singlet, meas);
    const double parity = p0[0] - p0[1] - p0[2] + p0[3];
    CHECK(std::abs(parity) < 1e-12);
}

TEST_CASE("measurement frames rotate the basis consistently") {
    th::Rng rng(321);
    CVector state = th::random_state(rng, 4);
    std::vector<Matrix2c> frames;
    for (int q = 0; q < 2; ++q) {
        PauliVector axis(rng.normal(), rng.normal(), rng.normal());
        frames.push_back(rotation_to_z(axis).adjoint());
    }
    MeasurementSpec framed = default_measurement(2);
    framed.frames = frames;
    RealVector a = outcome_distribution(state, framed);

    std::vector<Matrix2c> inverse = {frames[0].adjoint(),
                                     frames[1].adjoint()};
    RealVector b = outcome_distribution(apply_local_rotations(state, inverse),
                                        default_measurement(2));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("shot sampling is reproducible and unbiased") {
    RealVector sure(3);
    sure << 0.0, 1.0, 0.0;
    auto counts = sample_shots(sure, 500, 99);
    CHECK(counts[1] == 500);
    CHECK(counts[0] + counts[2] == 0);

    RealVector uniform = RealVector::Constant(4, 0.25);
    auto big = sample_shots(uniform, 1000000, 7, 3);
    for (auto c : big) {
        CHECK(std::abs(static_cast<double>(c) - 250000.0) <
              5.0 * std::sqrt(1000000.0 * 0.25 * 0.75));
    }

    auto again = sample_shots(uniform, 1000000, 7, 3);
    CHECK(big == again);
    auto other_stream = sample_shots(uniform, 1000000, 7, 4);
    CHECK(big != other_stream);

    CHECK_THROWS_AS(sample_shots(uniform, 0, 7), std::invalid_argument);
    RealVector bad(2);
    bad << 0.7, 0.7;
    CHECK_THROWS_AS(sample_shots(bad, 10, 7), std::invalid_argument);
}

TEST_CASE("maximum likelihood recovers the generating parameter") {
    const double T = 1.0;
    auto model = [T](double theta) { return clock_fringe(T, theta); };

    SUBCASE("expected counts are a fixed point") {
        const double truth = 0.1234;
        RealVector counts = 100000.0 * clock_fringe(T, truth);
        auto est = estimate_theta(counts, model, -0.3, 0.4);
        CHECK(std::abs(est.theta_hat - truth) < 3e-6);
    }

    SUBCASE("sampled counts land within five standard errors") {
        const double truth = 0.05;
        const std::int64_t mu = 100000;
        auto counts = sample_shots(clock_fringe(T, truth), mu, 2024);
        auto est = estimate_theta(to_real_counts(counts), model, -0.3, 0.4);
        const double sigma = 1.0 / std::sqrt(16.0 * T * T *
                                             static_cast<double>(mu));
        CHECK(std::abs(est.theta_hat - truth) < 5.0 * sigma);
        CHECK(est.shots == mu);

        // curvature-based variance matches the information of this curve
        const double ratio =
            static_cast<double>(mu) * est.sample_variance * 16.0 * T * T;
        CHECK(ratio > 0.85);
        CHECK(ratio < 1.15);
    }

    SUBCASE("flat likelihood is rejected") {
        auto flat = [](double) {
            return RealVector::Constant(4, 0.25).eval();
        };
        RealVector counts(4);
        counts << 25.0, 25.0, 25.0, 25.0;
        CHECK_THROWS_AS(estimate_theta(counts, flat, -1.0, 1.0),
                        std::runtime_error);
    }

    SUBCASE("validation") {
        RealVector counts(4);
        counts << 10.0, 10.0, 10.0, 10.0;
        CHECK_THROWS_AS(estimate_theta(counts, model, 0.5, -0.5),
                        std::invalid_argument);
        RealVector negative(4);
        negative << -1.0, 2.0, 3.0, 4.0;
        CHECK_THROWS_AS(estimate_theta(negative, model, -0.5, 0.5),
                        std::invalid_argument);
        CHECK_THROWS_AS(estimate_theta(RealVector::Zero(4), model, -0.5, 0.5),
                        std::invalid_argument);
    }
}

TEST_CASE("estimator concentrates on the truth as shots grow") {
    const double T = 1.0;
    auto model = [T](double theta) { return clock_fringe(T, theta); };
    const double truth = 0.02;
    const std::int64_t mu = 1000000;
    const int reps = 100;

    double mean = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        auto counts =
            sample_shots(clock_fringe(T, truth), mu, 5000 + rep);
        auto est = estimate_theta(to_real_counts(counts), model, -0.3, 0.3);
        mean += est.theta_hat;
    }
    mean /= reps;
    const double sigma = 1.0 / std::sqrt(16.0 * static_cast<double>(mu));
    CHECK(std::abs(mean - truth) < 3.0 * sigma / std::sqrt(1.0 * reps));
}

TEST_CASE("combination scan reproduces the clock working point") {
    auto sc = builtin_scenario("clock_sync");
    TimeGrid grid(1.0, 400);
    auto scan = combination_scan(sc.network, sc.truth, sc.weights, sc.probe,
                                 sc.control, grid);

    CHECK(scan.half_width ==
          doctest::Approx(M_PI / (2.0 * std::sqrt(8.0))).epsilon(1e-9));
    RealVector center = scan.distribution(0.0);
    CHECK((center - RealVector::Constant(4, 0.25)).cwiseAbs().maxCoeff() <
          1e-12);

    const double j_eff =
        effective_qfi(qfim(scan.probe, scan.generators), sc.weights);
    CHECK(j_eff == doctest::Approx(16.0).epsilon(1e-9));

    const double cfi =
        sc.weights.squaredNorm() *
        classical_fisher(scan.distribution, 0.0, 0.01);
    CHECK(cfi == doctest::Approx(16.0).epsilon(1e-3));
}

TEST_CASE("saturation chain for the built-in working points") {
    for (const char* name : {"clock_sync", "radar"}) {
        auto sc = builtin_scenario(name);
        TimeGrid grid(1.0, 500);
        auto scan = combination_scan(sc.network, sc.truth, sc.weights,
                                     sc.probe, sc.control, grid);
        const double j_eff =
            effective_qfi(qfim(scan.probe, scan.generators), sc.weights);
        const double bound =
            qfi_upper_bound(sc.network, sc.truth, sc.weights, grid);
        const double info_unit = j_eff / sc.weights.squaredNorm();
        const double cfi = sc.weights.squaredNorm() *
                           classical_fisher(scan.distribution, 0.0,
                                            0.03 / std::sqrt(info_unit));
        CHECK(j_eff == doctest::Approx(bound).epsilon(1e-3));
        CHECK(cfi == doctest::Approx(j_eff).epsilon(1e-3));
        CHECK(j_eff == doctest::Approx(16.0).epsilon(1e-3));
    }
}

TEST_CASE("adaptive estimation on the clock runs a single entangled stage") {
    auto sc = builtin_scenario("clock_sync");
    sc.steps_per_unit_time = 400;
    auto result = adaptive_estimate(sc, 10000, 90000, 5, 31);

    CHECK(result.trace.size() == 1);
    CHECK(result.trace[0].protocol == "none");
    CHECK(result.shots == 100000);

    const WeightVector unit = sc.weights / sc.weights.norm();
    const double target = unit.dot(sc.truth);
    const double sigma = std::sqrt(2.0 / (16.0 * 100000.0));
    CHECK(std::abs(result.theta_hat - target) < 5.0 * sigma);

    // curvature variance tracks the weak bound w^T w / (mu J)
    const double ratio = 100000.0 * result.sample_variance / (2.0 / 16.0);
    CHECK(ratio > 0.85);
    CHECK(ratio < 1.20);
}

TEST_CASE("adaptive estimation refines the radar parameters") {
    auto sc = builtin_scenario("radar");
    sc.steps_per_unit_time = 400;
    sc.start = point({0.25, 0.45});
    auto result = adaptive_estimate(sc, 4000, 20000, 2, 67);

    CHECK(result.trace.size() == 4); // two rough stages + two rounds
    CHECK(result.trace[0].protocol == "separable");
    CHECK(result.trace[3].protocol == "cancel");

    const WeightVector unit = sc.weights / sc.weights.norm();
    const double target = unit.dot(sc.truth);
    CHECK(std::abs(result.theta_hat - target) <
          6.0 * std::sqrt(result.sample_variance));

    const double offset_before = (sc.start - sc.truth).norm();
    const double offset_after =
        (result.trace.back().x_hat - sc.truth).norm();
    CHECK(offset_after < offset_before);

    const std::int64_t final_batch = result.trace.back().shots;
    const double ratio = static_cast<double>(final_batch) *
                         result.sample_variance / (2.0 / 16.0);
    CHECK(ratio > 0.75);
    CHECK(ratio < 1.30);
}

TEST_CASE("separable baseline carries twice the variance of the entangled run") {
    auto sc = builtin_scenario("clock_sync");
    sc.steps_per_unit_time = 400;

    auto entangled = adaptive_estimate(sc, 0, 100000, 1, 11);
    auto separable = separable_estimate(sc, 100000, 11);
    CHECK(separable.shots == 100000);
    CHECK(separable.trace.size() == 2);

    const double ratio =
        separable.sample_variance / entangled.sample_variance;
    CHECK(ratio > 1.8);
    CHECK(ratio < 2.2);

    const WeightVector unit = sc.weights / sc.weights.norm();
    CHECK(std::abs(separable.theta_hat - unit.dot(sc.truth)) <
          6.0 * std::sqrt(separable.sample_variance));
}

TEST_CASE("product probe information is half the entangled clock value") {
    auto sc = builtin_scenario("clock_sync");
    const double T = 1.0;
    TimeGrid grid(T, 200);
    auto gens = generators(sc.network, sc.truth, sc.weights,
                           propagate(sc.network, sc.truth, grid), grid);
    CVector product = make_probe({ProbeKind::product, 2, {}});
    const double j_sep = effective_qfi(qfim(product, gens), sc.weights);
    CHECK(j_sep == doctest::Approx(8.0 * T * T).epsilon(1e-10));

    CVector singlet = make_probe({ProbeKind::bell_singlet, 2, {}});
    const double j_ent = effective_qfi(qfim(singlet, gens), sc.weights);
    CHECK(j_ent / j_sep == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("bit-flip parity relations of the transverse measurement") {
    SUBCASE("ghz in the z basis is flip invariant") {
        CVector ghz = make_probe({ProbeKind::ghz, 2, {}});
        MeasurementSpec zz;
        zz.bases = {LocalBasis::z, LocalBasis::z};
        RealVector p = outcome_distribution(ghz, zz);
        for (int m = 0; m < 4; ++m)
            CHECK(p[m] == doctest::Approx(p[3 - m]).epsilon(1e-12));
    }

    SUBCASE("clock fringe is invariant under a global bit-flip") {
        SensorNetwork net;
        net.nodes.push_back({1, constant_z_field(0)});
        net.nodes.push_back({1, constant_z_field(1)});
        net.parameter_count = 2;
        TimeGrid grid(1.0, 64);
        CVector singlet = make_probe({ProbeKind::bell_singlet, 2, {}});
        auto meas = default_measurement(2);
        const double theta = 0.13;
        RealVector plus = outcome_distribution(
            final_propagator(net, point({1.0 + theta, 1.0 - theta}), grid) *
                singlet,
            meas);
        RealVector minus = outcome_distribution(
            final_propagator(net, point({1.0 - theta, 1.0 + theta}), grid) *
                singlet,
            meas);
        // two measured qubits: the outcome parity survives a global flip,
        // so the distribution is flip invariant at fixed theta while a
        // single-bit flip reflects theta
        for (int m = 0; m < 4; ++m) {
            CHECK(plus[m] == doctest::Approx(plus[3 - m]).epsilon(1e-10));
            CHECK(plus[m ^ 1] == doctest::Approx(minus[m]).epsilon(1e-10));
        }
    }

    SUBCASE("three-qubit collective phase obeys the same relation") {
        SensorNetwork net;
        net.nodes.push_back({3, constant_z_field(0)});
        net.parameter_count = 1;
        TimeGrid grid(1.0, 64);
        CVector ghz = make_probe({ProbeKind::ghz, 3, {}});
        auto meas = default_measurement(3);
        const double theta = 0.09;
        RealVector plus = outcome_distribution(
            final_propagator(net, point({theta}), grid) * ghz, meas);
        RealVector minus = outcome_distribution(
            final_propagator(net, point({-theta}), grid) * ghz, meas);
        for (int m = 0; m < 8; ++m)
            CHECK(plus[m] == doctest::Approx(minus[7 - m]).epsilon(1e-10));
    }
}

TEST_CASE("monte carlo variance tracks the weak bound") {
    auto sc = builtin_scenario("clock_sync");
    sc.steps_per_unit_time = 200;
    const std::int64_t mu = 10000;
    const int reps = 100;

    const WeightVector unit = sc.weights / sc.weights.norm();
    const double target = unit.dot(sc.truth);
    double sum = 0.0, sum2 = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        auto result = adaptive_estimate(sc, 0, mu, 1, 1000 + rep);
        const double d = result.theta_hat - target;
        sum += d;
        sum2 += d * d;
    }
    const double variance =
        (sum2 - sum * sum / reps) / (reps - 1);
    const double crb = 2.0 / (16.0 * static_cast<double>(mu));
    const double ratio = variance / crb;
    CHECK(ratio > 0.70);
    CHECK(ratio < 1.35);
}
