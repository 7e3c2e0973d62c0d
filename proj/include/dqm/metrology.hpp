#pragma once

#include <functional>

#include <dqm/dynamics.hpp>
#include <dqm/model.hpp>

namespace dqm {

using QFIM = Eigen::MatrixXd;

// Headline numbers for one configuration: the attained information, the
// control-theoretic ceiling, and the implied variance floor at mu repetitions.
struct PrecisionReport {
    double effective_qfi = 0.0;
    double upper_bound = 0.0;
    double variance_bound = 0.0;
    int repetitions = 1;
};

QFIM qfim(const CVector& state, const GeneratorSet& gens);

double effective_qfi(const QFIM& j, const WeightVector& w);

double qfi_upper_bound(const SensorNetwork& net, const ParameterPoint& x,
                       const WeightVector& w, const TimeGrid& grid);

// Returns infinity when the information vanishes.
double precision_bound(double j_eff, const WeightVector& w, int mu);

PrecisionReport make_precision_report(double j_eff, double upper_bound,
                                      const WeightVector& w, int mu);

// Overlap-curvature estimate of the information along a unit direction in
// parameter space, independent of the generator accumulation path.
double fidelity_qfi_oracle(const SensorNetwork& net, const ParameterPoint& x,
                           const TimeGrid& grid, const CVector& probe,
                           const RealVector& direction, double eps = 1e-4);
double fidelity_qfi_oracle(const SensorNetwork& net, const ParameterPoint& x,
                           const ControlProtocol& control, const TimeGrid& grid,
                           const CVector& probe, const RealVector& direction,
                           double eps = 1e-4);

double classical_fisher(const std::function<RealVector(double)>& probabilities,
                        double theta0, double dtheta);

// Per-qubit Bloch components of an operator: component (q, a) is
// Re tr(op * sigma_a on qubit q) / dim. For a sum of single-qubit terms this
// recovers each qubit's direction exactly.
std::vector<PauliVector> local_bloch_components(const CMatrix& op, int qubits);

} // namespace dqm
