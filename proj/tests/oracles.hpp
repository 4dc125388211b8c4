#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>

namespace testing {

using cd = std::complex<double>;

inline double max_abs(const Eigen::MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Fixed-seed source for randomized property checks.
inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(424242);
    return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

// Hermitian matrix with independent uniform entries.
inline Eigen::MatrixXcd random_hermitian(Eigen::Index n) {
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cd(uniform(-1, 1), uniform(-1, 1));
    return 0.5 * (m + m.adjoint());
}

inline Eigen::VectorXcd random_state(Eigen::Index n) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cd(uniform(-1, 1), uniform(-1, 1));
    return v.normalized();
}

}  // namespace testing
