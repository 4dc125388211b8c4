#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>

namespace qspace::fock {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr double kHermitianTolerance = 1e-12;

/// Dense operator on the span of Fock states |0>, ..., |N-1>.
class FockOperator {
public:
    FockOperator(ComplexMatrix matrix, double hbar, std::string label);

    std::size_t n_levels() const { return std::size_t(matrix_.rows()); }
    const ComplexMatrix& matrix() const { return matrix_; }
    double hbar() const { return hbar_; }
    const std::string& label() const { return label_; }

    bool is_hermitian(double tol = kHermitianTolerance) const;

private:
    ComplexMatrix matrix_;
    double hbar_;
    std::string label_;
};

class StateVector {
public:
    explicit StateVector(ComplexVector amplitudes);

    static StateVector vacuum(std::size_t n_levels);
    static StateVector basis(std::size_t n_levels, std::size_t n);

    std::size_t n_levels() const { return std::size_t(amplitudes_.size()); }
    const ComplexVector& amplitudes() const { return amplitudes_; }
    double norm() const { return amplitudes_.norm(); }
    bool is_normalized(double tol = 1e-12) const;
    StateVector normalized() const;

private:
    ComplexVector amplitudes_;
};

struct Ladder {
    FockOperator a;
    FockOperator a_dag;
};

struct Quadratures {
    FockOperator x;
    FockOperator p;
};

struct CommutatorDefect {
    double interior_max = 0.0;
    Complex corner;
};

struct HamiltonianKind {
    enum class Type { harmonic, free, quartic };

    Type type = Type::harmonic;
    double lambda = 0.0;

    static HamiltonianKind harmonic() { return {Type::harmonic, 0.0}; }
    static HamiltonianKind free_particle() { return {Type::free, 0.0}; }
    static HamiltonianKind quartic(double lambda) { return {Type::quartic, lambda}; }

    std::string name() const;
};

// a has sqrt(n) on the superdiagonal. N >= 2.
Ladder build_ladder(std::size_t n_levels);

// X = sqrt(hbar/2)(a + a^dag), P = i sqrt(hbar/2)(a^dag - a).
Quadratures build_xp(std::size_t n_levels, double hbar = 1.0);

// D = [X, P] - i hbar I. On the truncated space D vanishes except at the corner
// (N-1, N-1), where it equals -i hbar N.
CommutatorDefect commutator_defect(const FockOperator& x, const FockOperator& p);

// harmonic (P^2 + X^2)/2, free P^2/2, quartic harmonic + lambda X^4; products of the
// truncated X and P matrices.
FockOperator build_hamiltonian(const HamiltonianKind& kind, std::size_t n_levels, double hbar = 1.0);

// Same operators in sparse storage, for cutoffs where the dense form does not fit.
SparseMatrix sparse_position(std::size_t n_levels, double hbar = 1.0);
SparseMatrix sparse_momentum(std::size_t n_levels, double hbar = 1.0);
SparseMatrix sparse_hamiltonian(const HamiltonianKind& kind, std::size_t n_levels, double hbar = 1.0);

double hermiticity_defect(const ComplexMatrix& m);
Complex expectation(const FockOperator& op, const StateVector& psi);
double variance(const FockOperator& op, const StateVector& psi);

// Kronecker product A (x) B; used only for small two-axis smoke tests.
FockOperator tensor_product(const FockOperator& a, const FockOperator& b);

// CSV `row,col,re,im`, row-major.
void write_operator_csv(std::ostream& out, const FockOperator& op);
// Reads the layout above; missing entries are zero. Dimension is 1 + the largest index.
FockOperator read_operator_csv(std::istream& in, double hbar, std::string label);

}  // namespace qspace::fock
