#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <dqm/control.hpp>
#include <dqm/dynamics.hpp>
#include <dqm/metrology.hpp>

namespace dqm {

enum class ProbeKind { ghz, bell_singlet, product, custom };

struct ProbeSpec {
    ProbeKind kind = ProbeKind::ghz;
    int qubits = 1;
    CVector amplitudes; // custom kind only
};

CVector make_probe(const ProbeSpec& spec);

enum class LocalBasis { x, y, z };

// Strictly local measurement: one basis per qubit. An optional per-qubit
// frame rotates that qubit's basis vectors; empty frames mean identity.
struct MeasurementSpec {
    std::vector<LocalBasis> bases;
    std::vector<Matrix2c> frames;
    int qubit_count() const { return static_cast<int>(bases.size()); }
};

// x on every qubit except the last, y on the last.
MeasurementSpec default_measurement(int qubits);

// Born-rule probabilities over the 2^Q bitstring outcomes, qubit 0 the most
// significant bit, bit 0 mapped to the +1 eigenvector.
RealVector outcome_distribution(const CVector& state,
                                const MeasurementSpec& meas);

// Applies the tensor product of per-qubit rotations to a state.
CVector apply_local_rotations(const CVector& state,
                              const std::vector<Matrix2c>& frames);

// Multinomial counts with one counter-keyed draw per shot, so a given
// (seed, stream) pair reproduces identical counts in any execution order.
std::vector<std::int64_t> sample_shots(const RealVector& dist, std::int64_t mu,
                                       std::uint64_t seed,
                                       std::uint64_t stream = 0);

struct StageRecord {
    int round = 0; // 0 marks the rough separable stage
    std::string protocol;
    ParameterPoint x_hat;
    std::int64_t shots = 0;
    double theta_hat = 0.0;
    double variance_estimate = 0.0;
};

struct EstimationResult {
    double theta_hat = 0.0;
    // Inverse observed information of the final likelihood scan.
    double sample_variance = 0.0;
    std::int64_t shots = 0;
    std::vector<StageRecord> trace;
};

// Windowed maximum likelihood for a one-parameter outcome model. Counts are
// real-valued so expected counts can be fed directly; the window must
// bracket the optimum of interest. Throws when the likelihood is flat over
// the window.
EstimationResult estimate_theta(
    const RealVector& counts,
    const std::function<RealVector(double)>& probabilities, double window_lo,
    double window_hi);

// Frozen forward model for scanning the normalized combination
// theta = w^T x / |w| around a working point: controls synthesized at x_hat,
// probe and measurement frames aligned to the generator there.
struct CombinationScan {
    std::function<RealVector(double)> distribution;
    CVector probe;
    MeasurementSpec measurement;
    ControlProtocol protocol;
    GeneratorSet generators;
    double half_width = 0.0; // scan window staying on one fringe branch
};

CombinationScan combination_scan(const SensorNetwork& net,
                                 const ParameterPoint& x_hat,
                                 const WeightVector& w, const ProbeSpec& probe,
                                 const ControlProtocol& protocol,
                                 const TimeGrid& grid);
CombinationScan combination_scan(const SensorNetwork& net,
                                 const ParameterPoint& x_hat,
                                 const WeightVector& w, const ProbeSpec& probe,
                                 ControlStrategy strategy,
                                 const TimeGrid& grid);

struct Scenario;

// Two-stage protocol: rough per-parameter estimation with separable probes,
// then entangled rounds with controls re-synthesized at the running estimate.
// Scenarios without control skip straight to one entangled round on the full
// shot budget. theta_hat estimates w^T x / |w|.
EstimationResult adaptive_estimate(const Scenario& scenario,
                                   std::int64_t stage1_shots,
                                   std::int64_t final_shots, int rounds,
                                   std::uint64_t seed);

// Separable baseline: every parameter estimated from per-qubit product
// probes, combination assembled classically.
EstimationResult separable_estimate(const Scenario& scenario,
                                    std::int64_t shots, std::uint64_t seed);

} // namespace dqm
