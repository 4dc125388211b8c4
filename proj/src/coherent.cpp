#include "qspace/coherent.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <unsupported/Eigen/FFT>

#include "qspace/csv.hpp"
#include "qspace/errors.hpp"

namespace qspace::coherent {

namespace {

void check_hbar(double hbar) {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ValidationError("hbar must be positive and finite");
}

void check_matched(const CoherentLabel& l1, const CoherentLabel& l2) {
    if (l1.d() != l2.d()) throw ValidationError("coherent labels have different axis counts");
}

ComplexMatrix axis_displacement(double p, double x, std::size_t n_levels) {
    const fock::Quadratures q = fock::build_xp(n_levels, 1.0);
    return unitary_exp(p * q.x.matrix() - x * q.p.matrix());
}

}  // namespace

CoherentLabel::CoherentLabel(std::vector<double> p_, std::vector<double> x_, double theta_)
    : p(std::move(p_)), x(std::move(x_)), theta(theta_) {
    if (p.size() != x.size()) throw ValidationError("p and x must have the same number of axes");
    if (p.empty()) throw ValidationError("a coherent label needs at least one axis");
    for (std::size_t i = 0; i < p.size(); ++i)
        if (!std::isfinite(p[i]) || !std::isfinite(x[i])) throw ValidationError("coherent label must be finite");
    if (!std::isfinite(theta)) throw ValidationError("coherent label phase must be finite");
}

double CoherentLabel::alpha_squared() const {
    double s = 0.0;
    for (std::size_t i = 0; i < d(); ++i) s += 0.5 * (x[i] * x[i] + p[i] * p[i]);
    return s;
}

ComplexMatrix unitary_exp(const ComplexMatrix& hermitian) {
    if (fock::hermiticity_defect(hermitian) > 1e-10 * std::max(1.0, hermitian.cwiseAbs().maxCoeff()))
        throw ValidationError("unitary_exp needs a Hermitian generator");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian);
    if (eig.info() != Eigen::Success) throw PrecisionError("eigendecomposition failed", 0.0);
    const ComplexVector phases = (Complex(0.0, 1.0) * eig.eigenvalues().cast<Complex>()).array().exp().matrix();
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

fock::FockOperator displacement(const CoherentLabel& label, std::size_t n_levels) {
    if (n_levels < 2) throw ValidationError("a truncated Fock space needs at least 2 levels");
    if (label.d() == 0) throw ValidationError("empty coherent label");
    ComplexMatrix u = axis_displacement(label.p[0], label.x[0], n_levels);
    for (std::size_t i = 1; i < label.d(); ++i) {
        const ComplexMatrix next = axis_displacement(label.p[i], label.x[i], n_levels);
        ComplexMatrix k(u.rows() * next.rows(), u.cols() * next.cols());
        for (Eigen::Index r = 0; r < u.rows(); ++r)
            for (Eigen::Index c = 0; c < u.cols(); ++c)
                k.block(r * next.rows(), c * next.cols(), next.rows(), next.cols()) = u(r, c) * next;
        u = std::move(k);
    }
    u *= std::polar(1.0, label.theta);
    return fock::FockOperator(std::move(u), 1.0, "U");
}

double fock_tail_mass(double mean, std::size_t n_levels) {
    if (mean < 0.0) throw ValidationError("Poisson mean must be nonnegative");
    if (mean == 0.0) return n_levels == 0 ? 1.0 : 0.0;
    // Sum P(K = n) for n >= n_levels, in log space.
    double total = 0.0;
    const double log_mean = std::log(mean);
    for (std::size_t n = n_levels;; ++n) {
        const double term = std::exp(-mean + double(n) * log_mean - std::lgamma(double(n) + 1.0));
        total += term;
        if (double(n) > mean && (term < 1e-20 * total || term == 0.0)) break;
        if (n > n_levels + 100000) break;
    }
    return std::min(total, 1.0);
}

fock::StateVector coherent_state(const CoherentLabel& label, std::size_t n_levels) {
    double tail = 0.0;
    for (std::size_t i = 0; i < label.d(); ++i)
        tail += fock_tail_mass(0.5 * (label.x[i] * label.x[i] + label.p[i] * label.p[i]), n_levels);
    if (tail > kTailTolerance)
        throw PrecisionError("Fock cutoff " + std::to_string(n_levels) + " discards tail mass " +
                                 format_double(tail) + " of the coherent state",
                             tail);
    const fock::FockOperator u = displacement(label, n_levels);
    return fock::StateVector(u.matrix().col(0));
}

Complex overlap_analytic(const CoherentLabel& l1, const CoherentLabel& l2, double hbar) {
    check_hbar(hbar);
    check_matched(l1, l2);
    double phase = l2.theta - l1.theta;
    double gauss = 0.0;
    for (std::size_t i = 0; i < l1.d(); ++i) {
        phase += (l1.x[i] * l2.p[i] - l1.p[i] * l2.x[i]) / (2.0 * hbar);
        const double dx = l1.x[i] - l2.x[i];
        const double dp = l1.p[i] - l2.p[i];
        gauss += (dx * dx + dp * dp) / (4.0 * hbar);
    }
    return std::polar(std::exp(-gauss), phase);
}

MatrixElements matrix_element_xp(const CoherentLabel& l1, const CoherentLabel& l2, double hbar, std::size_t axis) {
    check_matched(l1, l2);
    if (axis >= l1.d()) throw ValidationError("axis out of range");
    const Complex ov = overlap_analytic(l1, l2, hbar);
    const double x1 = l1.x[axis], x2 = l2.x[axis], p1 = l1.p[axis], p2 = l2.p[axis];
    return {0.5 * Complex(x1 + x2, -(p1 - p2)) * ov, 0.5 * Complex(p1 + p2, x1 - x2) * ov};
}

OvercompletenessResult overcompleteness_residual(std::size_t n_levels, double radius, double step,
                                                 std::size_t n_sub) {
    if (!(radius > 0.0) || !(step > 0.0)) throw ValidationError("grid radius and step must be positive");
    if (n_sub < 1 || n_sub > n_levels) throw ValidationError("need 1 <= n_sub <= N");
    const auto count = std::size_t(std::floor(2.0 * radius / step + 1e-9)) + 1;
    const auto m = Eigen::Index(n_sub);
    ComplexMatrix s = ComplexMatrix::Zero(m, m);
    ComplexVector amp(m);
    for (std::size_t i = 0; i < count; ++i) {
        const double x = -radius + double(i) * step;
        for (std::size_t j = 0; j < count; ++j) {
            const double p = -radius + double(j) * step;
            // <n|alpha> = e^{-|alpha|^2/2} alpha^n / sqrt(n!), built by recurrence.
            const Complex alpha = Complex(x, p) / std::numbers::sqrt2;
            amp(0) = std::exp(-0.5 * std::norm(alpha));
            for (Eigen::Index n = 1; n < m; ++n) amp(n) = amp(n - 1) * alpha / std::sqrt(double(n));
            s.noalias() += amp * amp.adjoint();
        }
    }
    s *= step * step / (2.0 * std::numbers::pi);
    OvercompletenessResult out;
    out.s00 = s(0, 0).real();
    out.n_labels = count * count;
    out.coarse_grid = step > 1.0;
    out.residual = (s - ComplexMatrix::Identity(m, m)).cwiseAbs().maxCoeff();
    return out;
}

double GridWavefunction::position(std::size_t j) const {
    return (double(j) - double(n_points() / 2)) * spacing;
}

double GridWavefunction::norm() const { return std::sqrt(samples.squaredNorm() * spacing); }

GridWavefunction grid_gaussian(std::size_t n_points, double spacing, double center, double sigma, double momentum) {
    if (n_points < 2 || !(spacing > 0.0) || !(sigma > 0.0)) throw ValidationError("invalid Gaussian grid parameters");
    GridWavefunction psi{spacing, ComplexVector(Eigen::Index(n_points))};
    for (std::size_t j = 0; j < n_points; ++j) {
        const double y = psi.position(j) - center;
        psi.samples(Eigen::Index(j)) = std::polar(std::exp(-y * y / (4.0 * sigma * sigma)), momentum * y);
    }
    const double n = psi.norm();
    if (n == 0.0) throw ValidationError("Gaussian is not resolved on the grid");
    psi.samples /= n;
    return psi;
}

GridWavefunction grid_delta(std::size_t n_points, double spacing, std::size_t j) {
    if (n_points < 2 || !(spacing > 0.0) || j >= n_points) throw ValidationError("invalid delta grid parameters");
    GridWavefunction psi{spacing, ComplexVector::Zero(Eigen::Index(n_points))};
    psi.samples(Eigen::Index(j)) = 1.0 / std::sqrt(spacing);
    return psi;
}

GridWavefunction position_translate(const GridWavefunction& psi, double x, double theta) {
    const auto m = Eigen::Index(psi.n_points());
    if (m < 2 || !(psi.spacing > 0.0)) throw ValidationError("invalid grid wavefunction");
    const Complex phase = std::polar(1.0, theta);
    const double shift = x / psi.spacing;
    const double whole = std::round(shift);
    GridWavefunction out{psi.spacing, ComplexVector(m)};
    if (std::abs(shift - whole) <= 1e-12 * std::max(1.0, std::abs(shift))) {
        const auto k = Eigen::Index(std::fmod(whole, double(m)));
        for (Eigen::Index j = 0; j < m; ++j) out.samples(((j + k) % m + m) % m) = phase * psi.samples(j);
        return out;
    }
    Eigen::FFT<double> fft;
    std::vector<Complex> time(psi.samples.data(), psi.samples.data() + m);
    std::vector<Complex> freq;
    fft.fwd(freq, time);
    const double length = double(m) * psi.spacing;
    for (Eigen::Index n = 0; n < m; ++n) {
        const double index = n < m / 2 ? double(n) : double(n - m);
        const double k = 2.0 * std::numbers::pi * index / length;
        freq[std::size_t(n)] *= std::polar(1.0, -k * x);
    }
    fft.inv(time, freq);
    for (Eigen::Index j = 0; j < m; ++j) out.samples(j) = phase * time[std::size_t(j)];
    return out;
}

void write_overlap_csv(std::ostream& out, const std::vector<OverlapRow>& rows) {
    CsvWriter csv(out);
    csv.header({"p1", "x1", "p2", "x2", "re", "im", "abs"});
    for (const auto& r : rows)
        csv.row({r.l1.p.at(0), r.l1.x.at(0), r.l2.p.at(0), r.l2.x.at(0), r.value.real(), r.value.imag(),
                 std::abs(r.value)});
}

}  // namespace qspace::coherent
