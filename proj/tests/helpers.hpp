#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>

// Test-side oracles, deliberately independent of the library implementation.

namespace th {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline std::uint64_t splitmix(std::uint64_t& s) {
    s += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    double uniform() { return double(splitmix(state) >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() {
        double u1 = uniform();
        while (u1 <= 1e-300)
            u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
};

// Quadruple-loop Kronecker product, entry by entry.
inline CMat kron_oracle(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index k = 0; k < b.rows(); ++k)
                for (Eigen::Index l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

// exp(M) by scaling-and-squaring with a plain Taylor series.
inline CMat taylor_exp(const CMat& m) {
    const double nrm = m.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    double scale = 1.0;
    while (nrm * scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }
    const CMat ms = m * scale;
    CMat term = CMat::Identity(m.rows(), m.cols());
    CMat sum = term;
    for (int k = 1; k <= 24; ++k) {
        term = (term * ms) / double(k);
        sum += term;
    }
    for (int s = 0; s < squarings; ++s)
        sum = sum * sum;
    return sum;
}

// exp(-i H t) through the series oracle.
inline CMat evolution_oracle(const CMat& h, double t) {
    return taylor_exp(std::complex<double>(0, -t) * h);
}

inline CVec random_state(Rng& rng, int dim) {
    CVec v(dim);
    for (int i = 0; i < dim; ++i)
        v[i] = std::complex<double>(rng.normal(), rng.normal());
    v.normalize();
    return v;
}

inline CMat random_hermitian(Rng& rng, int dim, double scale = 1.0) {
    CMat a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            a(i, j) = std::complex<double>(rng.normal(), rng.normal());
    return CMat(scale * 0.5 * (a + a.adjoint()));
}

template <typename DerivedA, typename DerivedB>
double max_abs_diff(const Eigen::MatrixBase<DerivedA>& a,
                    const Eigen::MatrixBase<DerivedB>& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace th
