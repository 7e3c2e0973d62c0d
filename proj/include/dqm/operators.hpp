#pragma once
#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

// Dense operator algebra for few-qubit registers. Conventions: qubit 0 is the
// leftmost Kronecker factor (most significant bit of a basis index), dimensions
// are powers of two up to 2^6.

namespace dqm {

template <class Real = double>
using PauliVec = Eigen::Matrix<Real, 3, 1>;
template <class Real = double>
using ComplexMatrix =
    Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real = double>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using PauliVector = PauliVec<double>;
using CMatrix = ComplexMatrix<double>;
using CVector = ComplexVector<double>;

inline constexpr int max_qubits = 6;

template <class Real = double>
Eigen::Matrix<std::complex<Real>, 2, 2> pauli_x() {
    Eigen::Matrix<std::complex<Real>, 2, 2> s;
    s << Real(0), Real(1), Real(1), Real(0);
    return s;
}

template <class Real = double>
Eigen::Matrix<std::complex<Real>, 2, 2> pauli_y() {
    using C = std::complex<Real>;
    Eigen::Matrix<C, 2, 2> s;
    s << C(0, 0), C(0, -1), C(0, 1), C(0, 0);
    return s;
}

template <class Real = double>
Eigen::Matrix<std::complex<Real>, 2, 2> pauli_z() {
    Eigen::Matrix<std::complex<Real>, 2, 2> s;
    s << Real(1), Real(0), Real(0), Real(-1);
    return s;
}

// v . sigma as a 2x2 Hermitian matrix.
template <class Real>
Eigen::Matrix<std::complex<Real>, 2, 2> pauli_dot(const PauliVec<Real>& v) {
    if (!v.allFinite())
        throw std::invalid_argument("pauli_dot: non-finite component");
    using C = std::complex<Real>;
    Eigen::Matrix<C, 2, 2> s;
    s << C(v.z(), 0), C(v.x(), -v.y()), C(v.x(), v.y()), C(-v.z(), 0);
    return s;
}

template <class Real>
ComplexMatrix<Real> identity_op(int qubits) {
    return ComplexMatrix<Real>::Identity(Eigen::Index(1) << qubits,
                                         Eigen::Index(1) << qubits);
}

// I^(q) (x) op (x) I^(Q-q-1)
template <class Real>
ComplexMatrix<Real> embed_local(const Eigen::Matrix<std::complex<Real>, 2, 2>& op,
                                int qubit, int total_qubits) {
    if (total_qubits < 1 || total_qubits > max_qubits)
        throw std::invalid_argument("embed_local: total_qubits out of range");
    if (qubit < 0 || qubit >= total_qubits)
        throw std::invalid_argument("embed_local: qubit index out of range");
    const auto left = identity_op<Real>(qubit);
    const auto right = identity_op<Real>(total_qubits - qubit - 1);
    ComplexMatrix<Real> mid = Eigen::kroneckerProduct(left, op);
    return Eigen::kroneckerProduct(mid, right).eval();
}

template <class Real>
ComplexMatrix<Real> hermitize(const ComplexMatrix<Real>& a) {
    return ((a + a.adjoint()) / Real(2)).eval();
}

template <class Real>
Real hermiticity_error(const ComplexMatrix<Real>& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

template <class Real>
bool is_hermitian(const ComplexMatrix<Real>& a, Real tol = Real(1e-12)) {
    return a.rows() == a.cols() && hermiticity_error<Real>(a) <= tol;
}

template <class Real>
Real unitarity_error(const ComplexMatrix<Real>& u) {
    ComplexMatrix<Real> r = u.adjoint() * u;
    r -= ComplexMatrix<Real>::Identity(u.rows(), u.cols());
    return r.cwiseAbs().maxCoeff();
}

namespace detail {
template <class Real>
void require_hermitian(const ComplexMatrix<Real>& a, const char* who) {
    if (a.rows() != a.cols())
        throw std::invalid_argument(std::string(who) + ": matrix not square");
    if (hermiticity_error<Real>(a) > Real(1e-10))
        throw std::invalid_argument(std::string(who) + ": matrix not Hermitian");
}
} // namespace detail

// (lambda_min, lambda_max)
template <class Real>
std::pair<Real, Real> eigen_bounds(const ComplexMatrix<Real>& a) {
    detail::require_hermitian<Real>(a, "eigen_bounds");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> es(a,
                                                          Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigen_bounds: eigensolver failed");
    const auto& ev = es.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

template <class Real>
Real expectation(const ComplexVector<Real>& state, const ComplexMatrix<Real>& a) {
    if (state.size() != a.rows())
        throw std::invalid_argument("expectation: dimension mismatch");
    const std::complex<Real> val = state.dot(a * state);
    return val.real();
}

// <A^2> - <A>^2, clipped to zero on tiny negative round-off.
template <class Real>
Real variance(const ComplexVector<Real>& state, const ComplexMatrix<Real>& a) {
    const ComplexVector<Real> as = a * state;
    if (state.size() != as.size())
        throw std::invalid_argument("variance: dimension mismatch");
    const Real second = as.squaredNorm();
    const Real first = state.dot(as).real();
    Real var = second - first * first;
    if (var < Real(0)) {
        if (var < Real(-1e-10))
            throw std::runtime_error("variance: negative beyond round-off, value " +
                                     std::to_string(double(var)));
        var = Real(0);
    }
    return var;
}

// exp(-i H dt) via eigendecomposition of Hermitian H.
template <class Real>
ComplexMatrix<Real> step_unitary(const ComplexMatrix<Real>& h, Real dt) {
    detail::require_hermitian<Real>(h, "step_unitary");
    if (!(dt > Real(0)) || !std::isfinite(double(dt)))
        throw std::invalid_argument("step_unitary: dt must be positive");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("step_unitary: eigensolver failed");
    const auto& lam = es.eigenvalues();
    ComplexVector<Real> phases(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        phases[i] = std::exp(std::complex<Real>(0, -lam[i] * dt));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// --- fixed-size SU(2) helpers used by the per-qubit control paths ---

using Matrix2c = Eigen::Matrix2cd;

inline Matrix2c pauli_dot2(const PauliVector& v) {
    using C = std::complex<double>;
    Matrix2c s;
    s << C(v.z(), 0), C(v.x(), -v.y()), C(v.x(), v.y()), C(-v.z(), 0);
    return s;
}

// exp(-i (h . sigma) tau), closed form.
inline Matrix2c su2_exponential(const PauliVector& h, double tau) {
    const double mag = h.norm();
    const double ang = mag * tau;
    Matrix2c u = std::cos(ang) * Matrix2c::Identity();
    if (mag > 0.0) {
        const PauliVector n = h / mag;
        u -= std::complex<double>(0, std::sin(ang)) * pauli_dot2(n);
    }
    return u;
}

// Principal log of a 2x2 unitary, traceless part only: returns h with
// exp(-i (h . sigma) tau) = G up to a global phase. Rotation angle taken in
// [0, pi]; for G proportional to -I the axis defaults to x.
inline PauliVector su2_log_traceless(const Matrix2c& g, double tau) {
    const std::complex<double> det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    const double delta = 0.5 * std::arg(det);
    const std::complex<double> phase = std::exp(std::complex<double>(0, -delta));
    const Matrix2c gs = phase * g;
    const double alpha = 0.5 * (gs(0, 0) + gs(1, 1)).real();
    PauliVector b;
    b.x() = 0.5 * (std::complex<double>(0, 1) * (gs(0, 1) + gs(1, 0))).real();
    b.y() = 0.5 * (gs(1, 0) - gs(0, 1)).real();
    b.z() = 0.5 * (std::complex<double>(0, 1) * (gs(0, 0) - gs(1, 1))).real();
    const double s = b.norm();
    const double theta = std::atan2(s, alpha);
    if (s < 1e-15) {
        if (theta > 1.0) // G ~ -I: pi rotation, axis conventionally x
            return PauliVector(theta / tau, 0, 0);
        return PauliVector::Zero();
    }
    return (theta / (s * tau)) * b;
}

// SU(2) rotation W with W (v . sigma) W^dag = |v| sigma_z: the minimal geodesic
// taking v to +z; at v = -z the rotation is about x by pi.
inline Matrix2c rotation_to_z(const PauliVector& v) {
    const double mag = v.norm();
    if (mag <= 0.0)
        return Matrix2c::Identity();
    const PauliVector n = v / mag;
    const PauliVector axis(n.y(), -n.x(), 0.0); // n x z
    const double s = axis.norm();
    const double c = n.z();
    if (s < 1e-14) {
        if (c > 0.0)
            return Matrix2c::Identity();
        return su2_exponential(PauliVector(1, 0, 0), M_PI / 2.0); // pi about x
    }
    const double angle = std::atan2(s, c);
    return su2_exponential(axis / s, angle / 2.0);
}

} // namespace dqm
