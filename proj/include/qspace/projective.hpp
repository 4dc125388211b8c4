#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "qspace/fock.hpp"

namespace qspace::projective {

using Eigen::VectorXd;

/// Real coordinates of a Fock-basis state: amplitude_n = (q_n + i p_n) / sqrt(2 hbar).
struct PhaseCoordinates {
    double hbar = 1.0;
    VectorXd q;
    VectorXd p;

    std::size_t n_levels() const { return std::size_t(q.size()); }
    // sum (q_n^2 + p_n^2) / 2hbar, the squared norm of the state.
    double squared_norm() const;
};

PhaseCoordinates to_coordinates(const fock::StateVector& psi, double hbar);
fock::StateVector from_coordinates(const PhaseCoordinates& c);

enum class Integrator { rk4, symplectic_leapfrog };

struct EvolutionSpec {
    fock::FockOperator hamiltonian;
    double t_final = 0.0;
    double dt = 1e-3;
    Integrator method = Integrator::rk4;
    std::size_t sample_every = 1;
};

// Throws ValidationError for a non-Hermitian Hamiltonian or inconsistent times. The
// symplectic leapfrog requires a real Hamiltonian matrix in the Fock basis.
void validate(const EvolutionSpec& spec);

// Number of integration steps and the sample times they produce (always includes 0 and t_final).
std::size_t step_count(const EvolutionSpec& spec);

struct StateSample {
    double t = 0.0;
    fock::StateVector state;
};

struct CoordinateSample {
    double t = 0.0;
    PhaseCoordinates coords;
};

// i hbar d|psi>/dt = H|psi>, hbar taken from the Hamiltonian.
std::vector<StateSample> schrodinger_evolve(const fock::StateVector& psi0, const EvolutionSpec& spec);

// dq_n/dt = dH/dp_n, dp_n/dt = -dH/dq_n with H(q, p) = <phi|H|phi>, in real arithmetic.
std::vector<CoordinateSample> hamilton_evolve(const PhaseCoordinates& c0, const EvolutionSpec& spec);

// Reference solution through the spectral propagator exp(-i H t / hbar), same sample times.
std::vector<StateSample> exact_evolve(const fock::StateVector& psi0, const EvolutionSpec& spec);

// H(q, p) = (q^T A q + p^T A p - 2 q^T B p) / 2hbar for H = A + iB.
double hamiltonian_function(const PhaseCoordinates& c, const fock::FockOperator& h);

struct Gradient {
    VectorXd dq;
    VectorXd dp;
};

// dH/dq = (A q - B p)/hbar, dH/dp = (A p + B q)/hbar.
Gradient hamiltonian_gradient(const PhaseCoordinates& c, const fock::FockOperator& h);

struct EquivalenceReport {
    double max_deviation = 0.0;  // max_t |c_schrodinger(t) - c_hamilton(t)|
    double norm_drift = 0.0;     // Schrodinger route
    double energy_drift = 0.0;   // H(q, p) along the Hamilton route
    std::vector<StateSample> schrodinger;
    std::vector<CoordinateSample> hamilton;
};

EquivalenceReport equivalence_report(const fock::StateVector& psi0, const EvolutionSpec& spec);

struct RayInvariants {
    double x = 0.0;
    double p = 0.0;
    double h = 0.0;
    double phase_sensitivity = 0.0;  // max change over 16 random global phases
};

RayInvariants ray_invariants(const fock::StateVector& psi, const fock::FockOperator& x, const fock::FockOperator& p,
                             const fock::FockOperator& h, std::uint64_t seed = 20170201);

/// RK4 for i hbar psi' = H psi with a sparse Hamiltonian. Each output interval `dt` is
/// split into substeps with dt * rho <= 1 (spectral radius rho bounded by the
/// Gershgorin row sums). `observe` is called at t = 0, dt, 2dt, ..., t_final.
void evolve_sparse(const fock::SparseMatrix& h, double hbar, const fock::ComplexVector& psi0, double t_final,
                   double dt, const std::function<void(double, const fock::ComplexVector&)>& observe);

// CSV `t,q_0..q_{N-1},p_0..p_{N-1}`.
void write_coordinates_csv(std::ostream& out, const std::vector<CoordinateSample>& traj);

}  // namespace qspace::projective
