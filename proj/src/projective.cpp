#include "qspace/projective.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

#include "qspace/csv.hpp"
#include "qspace/errors.hpp"

namespace qspace::projective {

using fock::Complex;
using fock::ComplexMatrix;
using fock::ComplexVector;
using Eigen::MatrixXd;

namespace {

constexpr Complex kI{0.0, 1.0};

double real_part_scale(const ComplexMatrix& m) { return std::max(1.0, m.cwiseAbs().maxCoeff()); }

// Step lengths of the integration grid; the last step absorbs any remainder.
double step_length(const EvolutionSpec& spec, std::size_t n, std::size_t steps) {
    if (n + 1 < steps) return spec.dt;
    return spec.t_final - double(steps - 1) * spec.dt;
}

bool is_sample(const EvolutionSpec& spec, std::size_t n, std::size_t steps) {
    return n == steps || n % spec.sample_every == 0;
}

ComplexVector rk4_step(const ComplexMatrix& h, double hbar, const ComplexVector& psi, double dt) {
    auto f = [&](const ComplexVector& v) -> ComplexVector { return (-kI / hbar) * (h * v); };
    const ComplexVector k1 = f(psi);
    const ComplexVector k2 = f(psi + 0.5 * dt * k1);
    const ComplexVector k3 = f(psi + 0.5 * dt * k2);
    const ComplexVector k4 = f(psi + dt * k3);
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// psi = u + i v with u' = A v / hbar, v' = -A u / hbar for real symmetric A.
ComplexVector leapfrog_step(const MatrixXd& a, double hbar, const ComplexVector& psi, double dt) {
    VectorXd u = psi.real();
    VectorXd v = psi.imag();
    v -= (0.5 * dt / hbar) * (a * u);
    u += (dt / hbar) * (a * v);
    v -= (0.5 * dt / hbar) * (a * u);
    return u.cast<Complex>() + kI * v.cast<Complex>();
}

struct RealBlocks {
    MatrixXd a;  // Re H, symmetric
    MatrixXd b;  // Im H, antisymmetric
};

RealBlocks split(const fock::FockOperator& h) { return {h.matrix().real(), h.matrix().imag()}; }

void check_dims(const PhaseCoordinates& c, const fock::FockOperator& h) {
    if (c.q.size() != c.p.size()) throw ValidationError("q and p have different lengths");
    if (c.n_levels() != h.n_levels()) throw ValidationError("coordinates and Hamiltonian dimensions differ");
}

}  // namespace

double PhaseCoordinates::squared_norm() const { return (q.squaredNorm() + p.squaredNorm()) / (2.0 * hbar); }

PhaseCoordinates to_coordinates(const fock::StateVector& psi, double hbar) {
    if (!(hbar > 0.0)) throw ValidationError("hbar must be positive");
    const double s = std::sqrt(2.0 * hbar);
    return {hbar, s * psi.amplitudes().real(), s * psi.amplitudes().imag()};
}

fock::StateVector from_coordinates(const PhaseCoordinates& c) {
    if (c.q.size() != c.p.size()) throw ValidationError("q and p have different lengths");
    if (!(c.hbar > 0.0)) throw ValidationError("hbar must be positive");
    const double s = 1.0 / std::sqrt(2.0 * c.hbar);
    return fock::StateVector(s * (c.q.cast<Complex>() + kI * c.p.cast<Complex>()));
}

void validate(const EvolutionSpec& spec) {
    const auto& h = spec.hamiltonian;
    if (fock::hermiticity_defect(h.matrix()) > fock::kHermitianTolerance * real_part_scale(h.matrix()))
        throw ValidationError("Hamiltonian is not Hermitian");
    if (!(spec.dt > 0.0) || !std::isfinite(spec.dt)) throw ValidationError("dt must be positive");
    if (!(spec.t_final >= 0.0) || !std::isfinite(spec.t_final)) throw ValidationError("t_final must be nonnegative");
    if (spec.t_final > 0.0 && spec.dt > spec.t_final) throw ValidationError("dt must not exceed t_final");
    if (spec.sample_every < 1) throw ValidationError("sample_every must be at least 1");
    if (spec.method == Integrator::symplectic_leapfrog &&
        h.matrix().imag().cwiseAbs().maxCoeff() > 1e-14 * real_part_scale(h.matrix()))
        throw ValidationError("the leapfrog integrator needs a real Hamiltonian matrix");
}

std::size_t step_count(const EvolutionSpec& spec) {
    if (spec.t_final == 0.0) return 0;
    return std::size_t(std::ceil(spec.t_final / spec.dt - 1e-9));
}

std::vector<StateSample> schrodinger_evolve(const fock::StateVector& psi0, const EvolutionSpec& spec) {
    validate(spec);
    if (psi0.n_levels() != spec.hamiltonian.n_levels()) throw ValidationError("state and Hamiltonian dimensions differ");
    const double hbar = spec.hamiltonian.hbar();
    const ComplexMatrix& h = spec.hamiltonian.matrix();
    const MatrixXd a = h.real();
    const std::size_t steps = step_count(spec);

    std::vector<StateSample> out{{0.0, psi0}};
    ComplexVector psi = psi0.amplitudes();
    double t = 0.0;
    for (std::size_t n = 0; n < steps; ++n) {
        const double dt = step_length(spec, n, steps);
        psi = spec.method == Integrator::rk4 ? rk4_step(h, hbar, psi, dt) : leapfrog_step(a, hbar, psi, dt);
        t = n + 1 == steps ? spec.t_final : double(n + 1) * spec.dt;
        if (is_sample(spec, n + 1, steps)) out.push_back({t, fock::StateVector(psi)});
    }
    return out;
}

double hamiltonian_function(const PhaseCoordinates& c, const fock::FockOperator& h) {
    check_dims(c, h);
    const RealBlocks m = split(h);
    return (c.q.dot(m.a * c.q) + c.p.dot(m.a * c.p) - 2.0 * c.q.dot(m.b * c.p)) / (2.0 * c.hbar);
}

Gradient hamiltonian_gradient(const PhaseCoordinates& c, const fock::FockOperator& h) {
    check_dims(c, h);
    const RealBlocks m = split(h);
    return {(m.a * c.q - m.b * c.p) / c.hbar, (m.a * c.p + m.b * c.q) / c.hbar};
}

std::vector<CoordinateSample> hamilton_evolve(const PhaseCoordinates& c0, const EvolutionSpec& spec) {
    validate(spec);
    check_dims(c0, spec.hamiltonian);
    if (c0.hbar != spec.hamiltonian.hbar()) throw ValidationError("coordinates and Hamiltonian use different hbar");
    const RealBlocks m = split(spec.hamiltonian);
    const double hbar = c0.hbar;
    const std::size_t steps = step_count(spec);

    // Hamilton's equations from the gradient of the bilinear form.
    auto velocity = [&](const VectorXd& q, const VectorXd& p, VectorXd& dq, VectorXd& dp) {
        dq = (m.a * p + m.b * q) / hbar;   //  dH/dp
        dp = -(m.a * q - m.b * p) / hbar;  // -dH/dq
    };

    std::vector<CoordinateSample> out{{0.0, c0}};
    VectorXd q = c0.q, p = c0.p;
    VectorXd dq1, dp1, dq2, dp2, dq3, dp3, dq4, dp4;
    for (std::size_t n = 0; n < steps; ++n) {
        const double dt = step_length(spec, n, steps);
        if (spec.method == Integrator::rk4) {
            velocity(q, p, dq1, dp1);
            velocity(q + 0.5 * dt * dq1, p + 0.5 * dt * dp1, dq2, dp2);
            velocity(q + 0.5 * dt * dq2, p + 0.5 * dt * dp2, dq3, dp3);
            velocity(q + dt * dq3, p + dt * dp3, dq4, dp4);
            q += (dt / 6.0) * (dq1 + 2.0 * dq2 + 2.0 * dq3 + dq4);
            p += (dt / 6.0) * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4);
        } else {
            // B = 0: H = (q^T A q + p^T A p)/2hbar is separable.
            p -= (0.5 * dt / hbar) * (m.a * q);
            q += (dt / hbar) * (m.a * p);
            p -= (0.5 * dt / hbar) * (m.a * q);
        }
        const double t = n + 1 == steps ? spec.t_final : double(n + 1) * spec.dt;
        if (is_sample(spec, n + 1, steps)) out.push_back({t, PhaseCoordinates{hbar, q, p}});
    }
    return out;
}

std::vector<StateSample> exact_evolve(const fock::StateVector& psi0, const EvolutionSpec& spec) {
    validate(spec);
    if (psi0.n_levels() != spec.hamiltonian.n_levels()) throw ValidationError("state and Hamiltonian dimensions differ");
    const double hbar = spec.hamiltonian.hbar();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(spec.hamiltonian.matrix());
    const ComplexVector coeffs = eig.eigenvectors().adjoint() * psi0.amplitudes();
    const std::size_t steps = step_count(spec);
    std::vector<StateSample> out{{0.0, psi0}};
    for (std::size_t n = 1; n <= steps; ++n) {
        if (!is_sample(spec, n, steps)) continue;
        const double t = n == steps ? spec.t_final : double(n) * spec.dt;
        ComplexVector phased(coeffs.size());
        for (Eigen::Index k = 0; k < coeffs.size(); ++k)
            phased(k) = std::polar(1.0, -eig.eigenvalues()(k) * t / hbar) * coeffs(k);
        out.push_back({t, fock::StateVector(eig.eigenvectors() * phased)});
    }
    return out;
}

EquivalenceReport equivalence_report(const fock::StateVector& psi0, const EvolutionSpec& spec) {
    EquivalenceReport r;
    const double hbar = spec.hamiltonian.hbar();
    const PhaseCoordinates c0 = to_coordinates(psi0, hbar);
    r.schrodinger = schrodinger_evolve(psi0, spec);
    r.hamilton = hamilton_evolve(c0, spec);
    const double norm0 = psi0.norm();
    const double energy0 = hamiltonian_function(c0, spec.hamiltonian);
    for (std::size_t i = 0; i < r.schrodinger.size(); ++i) {
        const PhaseCoordinates cs = to_coordinates(r.schrodinger[i].state, hbar);
        const auto& ch = r.hamilton[i].coords;
        const double dev = std::sqrt((cs.q - ch.q).squaredNorm() + (cs.p - ch.p).squaredNorm());
        r.max_deviation = std::max(r.max_deviation, dev);
        r.norm_drift = std::max(r.norm_drift, std::abs(r.schrodinger[i].state.norm() - norm0));
        r.energy_drift = std::max(r.energy_drift, std::abs(hamiltonian_function(ch, spec.hamiltonian) - energy0));
    }
    return r;
}

RayInvariants ray_invariants(const fock::StateVector& psi, const fock::FockOperator& x, const fock::FockOperator& p,
                             const fock::FockOperator& h, std::uint64_t seed) {
    auto observe = [&](const fock::StateVector& s) {
        return std::array<double, 3>{fock::expectation(x, s).real(), fock::expectation(p, s).real(),
                                     fock::expectation(h, s).real()};
    };
    const auto base = observe(psi);
    RayInvariants out{base[0], base[1], base[2], 0.0};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < 16; ++i) {
        const auto moved = observe(fock::StateVector(std::polar(1.0, angle(rng)) * psi.amplitudes()));
        for (int k = 0; k < 3; ++k)
            out.phase_sensitivity = std::max(out.phase_sensitivity, std::abs(moved[std::size_t(k)] - base[std::size_t(k)]));
    }
    return out;
}

void evolve_sparse(const fock::SparseMatrix& h, double hbar, const ComplexVector& psi0, double t_final, double dt,
                   const std::function<void(double, const ComplexVector&)>& observe) {
    if (h.rows() != h.cols() || h.rows() != psi0.size()) throw ValidationError("dimension mismatch in evolve_sparse");
    if (!(hbar > 0.0) || !(dt > 0.0) || !(t_final >= 0.0)) throw ValidationError("invalid evolution parameters");

    // Shift by the mean energy; the removed global phase is restored for the observer.
    const double e0 = psi0.dot(h * psi0).real() / psi0.squaredNorm();
    fock::SparseMatrix shifted = h;
    for (Eigen::Index k = 0; k < shifted.rows(); ++k) shifted.coeffRef(k, k) -= e0;
    shifted.makeCompressed();

    double radius = 0.0;
    {
        Eigen::VectorXd rows = Eigen::VectorXd::Zero(shifted.rows());
        for (Eigen::Index c = 0; c < shifted.outerSize(); ++c)
            for (fock::SparseMatrix::InnerIterator it(shifted, c); it; ++it) rows(it.row()) += std::abs(it.value());
        radius = rows.maxCoeff() / hbar;
    }
    const std::size_t substeps = std::max<std::size_t>(1, std::size_t(std::ceil(dt * radius)));

    ComplexVector psi = psi0;
    ComplexVector k1, k2, k3, k4;
    auto f = [&](const ComplexVector& v, ComplexVector& out) { out.noalias() = (-kI / hbar) * (shifted * v); };
    auto emit = [&](double t) { observe(t, std::polar(1.0, -e0 * t / hbar) * psi); };

    emit(0.0);
    if (t_final == 0.0) return;
    const auto outputs = std::size_t(std::ceil(t_final / dt - 1e-9));
    double t = 0.0;
    for (std::size_t n = 0; n < outputs; ++n) {
        const double interval = n + 1 < outputs ? dt : t_final - double(outputs - 1) * dt;
        const double h_sub = interval / double(substeps);
        for (std::size_t s = 0; s < substeps; ++s) {
            f(psi, k1);
            f(psi + 0.5 * h_sub * k1, k2);
            f(psi + 0.5 * h_sub * k2, k3);
            f(psi + h_sub * k3, k4);
            psi += (h_sub / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        t = n + 1 == outputs ? t_final : double(n + 1) * dt;
        emit(t);
    }
}

void write_coordinates_csv(std::ostream& out, const std::vector<CoordinateSample>& traj) {
    CsvWriter csv(out);
    if (traj.empty()) return;
    const std::size_t n = traj.front().coords.n_levels();
    std::vector<std::string> cols{"t"};
    for (std::size_t k = 0; k < n; ++k) cols.push_back("q_" + std::to_string(k));
    for (std::size_t k = 0; k < n; ++k) cols.push_back("p_" + std::to_string(k));
    csv.header(cols);
    for (const auto& s : traj) {
        std::vector<double> row{s.t};
        row.insert(row.end(), s.coords.q.data(), s.coords.q.data() + s.coords.q.size());
        row.insert(row.end(), s.coords.p.data(), s.coords.p.data() + s.coords.p.size());
        csv.row(row);
    }
}

}  // namespace qspace::projective
