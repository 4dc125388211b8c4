#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "qspace/fock.hpp"

namespace qspace::coherent {

using fock::Complex;
using fock::ComplexMatrix;
using fock::ComplexVector;

// Largest discarded Fock-tail mass accepted by coherent_state.
inline constexpr double kTailTolerance = 1e-12;

/// Phase-space label (p, x) with one entry per axis, plus the central phase theta.
/// The state it names is U(p, x, theta)|0> = e^{i theta}|p, x>.
struct CoherentLabel {
    std::vector<double> p;
    std::vector<double> x;
    double theta = 0.0;

    CoherentLabel() = default;
    CoherentLabel(std::vector<double> p, std::vector<double> x, double theta = 0.0);
    static CoherentLabel axis(double p, double x, double theta = 0.0) { return {{p}, {x}, theta}; }

    std::size_t d() const { return p.size(); }
    // |alpha|^2 summed over axes, alpha = (x + i p)/sqrt(2).
    double alpha_squared() const;
};

// exp(i G) for Hermitian G, through the eigendecomposition of G.
ComplexMatrix unitary_exp(const ComplexMatrix& hermitian);

// U = exp(i(p X - x P + theta I)) at hbar = 1. For d > 1 the result is the
// Kronecker product of per-axis factors (dimension N^d).
fock::FockOperator displacement(const CoherentLabel& label, std::size_t n_levels);

// Probability that a Poisson variable with the given mean is >= n_levels.
double fock_tail_mass(double mean, std::size_t n_levels);

// U(label)|0>. Throws PrecisionError when the discarded tail exceeds kTailTolerance.
fock::StateVector coherent_state(const CoherentLabel& label, std::size_t n_levels);

/// <l1|l2> for labels in the sqrt(hbar)-relabeled convention:
///   exp[i(x1.p2 - p1.x2)/2hbar] exp[-((x1-x2)^2 + (p1-p2)^2)/4hbar] e^{i(theta2 - theta1)}
Complex overlap_analytic(const CoherentLabel& l1, const CoherentLabel& l2, double hbar = 1.0);

struct MatrixElements {
    Complex mx;
    Complex mp;
};

// <l1|X^c|l2> and <l1|P^c|l2> on one axis, X^c = sqrt(hbar) X.
MatrixElements matrix_element_xp(const CoherentLabel& l1, const CoherentLabel& l2, double hbar = 1.0,
                                 std::size_t axis = 0);

struct OvercompletenessResult {
    double residual = 0.0;
    double s00 = 0.0;
    std::size_t n_labels = 0;
    bool coarse_grid = false;  // h > 1
};

/// S = (h^2 / 2 pi) sum |l><l| over the square label grid (p, x) in [-R, R]^2 with
/// step h, restricted to levels 0..n_sub-1; returns max |S - 1|.
OvercompletenessResult overcompleteness_residual(std::size_t n_levels, double radius, double step,
                                                 std::size_t n_sub);

/// Samples on the periodic grid y_j = (j - M/2) dy.
struct GridWavefunction {
    double spacing = 1.0;
    ComplexVector samples;

    std::size_t n_points() const { return std::size_t(samples.size()); }
    double position(std::size_t j) const;
    // Discrete L2 norm sqrt(sum |psi_j|^2 dy).
    double norm() const;
};

GridWavefunction grid_gaussian(std::size_t n_points, double spacing, double center, double sigma,
                               double momentum = 0.0);
// Normalized discrete delta at sample j.
GridWavefunction grid_delta(std::size_t n_points, double spacing, std::size_t j);

// e^{i theta} psi(y - x). Integer multiples of the spacing are exact rolls; other shifts
// use the spectral (Fourier) shift.
GridWavefunction position_translate(const GridWavefunction& psi, double x, double theta);

struct OverlapRow {
    CoherentLabel l1;
    CoherentLabel l2;
    Complex value;
};

// CSV `p1,x1,p2,x2,re,im,abs` (first axis).
void write_overlap_csv(std::ostream& out, const std::vector<OverlapRow>& rows);

}  // namespace qspace::coherent
