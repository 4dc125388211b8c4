#include "qspace/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "qspace/csv.hpp"
#include "qspace/errors.hpp"
#include "qspace/projective.hpp"

namespace qspace::contraction {

namespace {

void check_hbar(double hbar) {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ValidationError("hbar must be positive and finite");
}

double separation_squared(const CoherentLabel& a, const CoherentLabel& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.d(); ++i) {
        const double dx = a.x[i] - b.x[i];
        const double dp = a.p[i] - b.p[i];
        s += dx * dx + dp * dp;
    }
    return s;
}

// e^{-|alpha|^2/2} alpha^n / sqrt(n!) for a single-axis label at hbar = 1.
fock::ComplexVector coherent_amplitudes(double p, double x, std::size_t n_levels) {
    const fock::Complex alpha = fock::Complex(x, p) / std::numbers::sqrt2;
    fock::ComplexVector amp(static_cast<Eigen::Index>(n_levels));
    amp(0) = std::exp(-0.5 * std::norm(alpha));
    for (Eigen::Index n = 1; n < amp.size(); ++n) amp(n) = amp(n - 1) * alpha / std::sqrt(double(n));
    return amp / amp.norm();
}

std::pair<double, double> classical_rhs(double x, double p, double lambda) {
    return {p, -x - 4.0 * lambda * x * x * x};
}

}  // namespace

std::pair<double, double> relabel(double p, double x, double hbar) {
    check_hbar(hbar);
    const double s = std::sqrt(hbar);
    return {s * p, s * x};
}

std::pair<double, double> unrelabel(double p_tilde, double x_tilde, double hbar) {
    check_hbar(hbar);
    const double s = std::sqrt(hbar);
    return {p_tilde / s, x_tilde / s};
}

CoherentLabel relabel(const CoherentLabel& label, double hbar) {
    CoherentLabel out = label;
    for (std::size_t i = 0; i < label.d(); ++i) std::tie(out.p[i], out.x[i]) = relabel(label.p[i], label.x[i], hbar);
    return out;
}

CoherentLabel unrelabel(const CoherentLabel& label, double hbar) {
    CoherentLabel out = label;
    for (std::size_t i = 0; i < label.d(); ++i)
        std::tie(out.p[i], out.x[i]) = unrelabel(label.p[i], label.x[i], hbar);
    return out;
}

std::size_t NPolicy::levels_for(double alpha_squared) const {
    if (!(alpha_squared >= 0.0) || !std::isfinite(alpha_squared)) throw ValidationError("|alpha|^2 must be finite");
    const double want = std::ceil(factor * alpha_squared);
    if (want > 1e8) throw ValidationError("Fock cutoff for |alpha|^2 = " + format_double(alpha_squared) + " is too large");
    return std::max(min_levels, std::size_t(want));
}

void validate_hbar_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw ValidationError("hbar grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        check_hbar(grid[i]);
        if (i > 0 && !(grid[i] < grid[i - 1])) throw ValidationError("hbar grid must be strictly descending");
    }
}

void validate(const SweepSpec& spec) {
    validate_hbar_grid(spec.hbar_grid);
    if (spec.label_pairs.empty()) throw ValidationError("no label pairs to sweep");
    if (spec.n_policy.min_levels < 2) throw ValidationError("N policy needs at least 2 levels");
    if (!(spec.n_policy.factor > 0.0)) throw ValidationError("N policy factor must be positive");
    for (const auto& pair : spec.label_pairs)
        if (pair.first.d() != pair.second.d()) throw ValidationError("label pair has mismatched axis counts");
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("fit inputs differ in length");
    if (x.size() < 2) throw ValidationError("a line fit needs at least two points");
    const double n = double(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw ValidationError("fit abscissae are all equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (x.size() > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            ssr += r * r;
        }
        fit.slope_stderr = std::sqrt(ssr / (n - 2.0) / sxx);
    } else {
        fit.slope_stderr = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

double DecayReport::relative_error() const {
    return std::abs(fitted_slope - expected_slope) / std::abs(expected_slope);
}

double DecayReport::max_numeric_difference() const {
    double worst = 0.0;
    for (const auto& r : rows)
        if (r.abs_overlap_numeric) worst = std::max(worst, std::abs(*r.abs_overlap_numeric - r.abs_overlap));
    return worst;
}

std::vector<DecayRow> decay_rows(const LabelPair& pair, const std::vector<double>& hbar_grid, const NPolicy& policy) {
    validate_hbar_grid(hbar_grid);
    if (pair.first.d() != pair.second.d()) throw ValidationError("label pair has mismatched axis counts");
    const bool distinct = separation_squared(pair.first, pair.second) > 0.0;
    std::vector<DecayRow> rows;
    for (double hbar : hbar_grid) {
        DecayRow row;
        row.hbar = hbar;
        row.abs_overlap = std::abs(coherent::overlap_analytic(pair.first, pair.second, hbar));
        if (distinct) {
            const auto diag = diagonalization_diagnostic({pair.first, pair.second}, hbar);
            row.offdiag_x = diag.ratio_x;
            row.offdiag_p = diag.ratio_p;
        } else {
            row.offdiag_x = row.offdiag_p = std::numeric_limits<double>::quiet_NaN();
        }
        const CoherentLabel a = unrelabel(pair.first, hbar);
        const CoherentLabel b = unrelabel(pair.second, hbar);
        row.n_levels = policy.levels_for(std::max(a.alpha_squared(), b.alpha_squared()));
        const double dim = std::pow(double(row.n_levels), double(a.d()));
        if (dim <= double(policy.max_numeric)) {
            const auto sa = coherent::coherent_state(a, row.n_levels);
            const auto sb = coherent::coherent_state(b, row.n_levels);
            row.abs_overlap_numeric = std::abs(sa.amplitudes().dot(sb.amplitudes()));
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<DecayReport> overlap_decay_sweep(const SweepSpec& spec) {
    validate(spec);
    std::vector<DecayReport> out;
    for (const auto& pair : spec.label_pairs) {
        const double d2 = separation_squared(pair.first, pair.second);
        if (!(d2 > 0.0)) throw ValidationError("identical labels give a degenerate decay fit");
        DecayReport report;
        report.labels = pair;
        report.rows = decay_rows(pair, spec.hbar_grid, spec.n_policy);
        report.expected_slope = -d2 / 4.0;
        std::vector<double> xs, ys;
        for (const auto& r : report.rows) {
            if (r.abs_overlap <= 0.0) continue;  // underflow
            xs.push_back(1.0 / r.hbar);
            ys.push_back(std::log(r.abs_overlap));
        }
        if (xs.size() < 2) throw ValidationError("fewer than two resolvable overlaps to fit");
        const LinearFit fit = fit_line(xs, ys);
        report.fitted_slope = fit.slope;
        report.slope_stderr = fit.slope_stderr;
        out.push_back(std::move(report));
    }
    return out;
}

DiagonalizationResult diagonalization_diagnostic(const std::vector<CoherentLabel>& labels, double hbar) {
    check_hbar(hbar);
    if (labels.size() < 2) throw ValidationError("diagonalization check needs at least two labels");
    double d_min = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < labels.size(); ++a)
        for (std::size_t b = a + 1; b < labels.size(); ++b) {
            if (labels[a].d() != labels[b].d()) throw ValidationError("labels have mismatched axis counts");
            const double s = separation_squared(labels[a], labels[b]);
            if (!(s > 0.0)) throw ValidationError("coincident labels in diagonalization check");
            d_min = std::min(d_min, std::sqrt(s));
        }
    DiagonalizationResult out;
    for (std::size_t a = 0; a < labels.size(); ++a)
        for (std::size_t b = 0; b < labels.size(); ++b) {
            if (a == b) continue;
            for (std::size_t axis = 0; axis < labels[a].d(); ++axis) {
                const auto m = coherent::matrix_element_xp(labels[a], labels[b], hbar, axis);
                out.ratio_x = std::max(out.ratio_x, std::abs(m.mx));
                out.ratio_p = std::max(out.ratio_p, std::abs(m.mp));
            }
        }
    out.ratio_x /= d_min;
    out.ratio_p /= d_min;
    return out;
}

std::vector<std::pair<double, double>> classical_trajectory(double x0, double p0, const fock::HamiltonianKind& kind,
                                                            double t_final, double dt) {
    if (!(dt > 0.0) || !(t_final >= 0.0)) throw ValidationError("need dt > 0 and t_final >= 0");
    const double lambda = kind.type == fock::HamiltonianKind::Type::quartic ? kind.lambda : 0.0;
    if (kind.type == fock::HamiltonianKind::Type::free)
        throw ValidationError("classical comparison supports the harmonic and quartic Hamiltonians");
    const auto steps = std::size_t(std::ceil(t_final / dt - 1e-9));
    constexpr int kSub = 10;
    std::vector<std::pair<double, double>> out{{x0, p0}};
    double x = x0, p = p0, t = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
        const double next = std::min(t_final, double(s + 1) * dt);
        const double h = (next - t) / kSub;
        for (int k = 0; k < kSub; ++k) {
            const auto [k1x, k1p] = classical_rhs(x, p, lambda);
            const auto [k2x, k2p] = classical_rhs(x + 0.5 * h * k1x, p + 0.5 * h * k1p, lambda);
            const auto [k3x, k3p] = classical_rhs(x + 0.5 * h * k2x, p + 0.5 * h * k2p, lambda);
            const auto [k4x, k4p] = classical_rhs(x + h * k3x, p + h * k3p, lambda);
            x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        }
        t = next;
        out.emplace_back(x, p);
    }
    return out;
}

std::vector<TrajectoryDeviation> classical_trajectory_emergence(const EmergenceSpec& spec) {
    validate_hbar_grid(spec.hbar_grid);
    if (spec.kind.type == fock::HamiltonianKind::Type::quartic && spec.kind.lambda < 0.0)
        throw ValidationError("quartic coupling must be nonnegative");
    if (!std::isfinite(spec.x0) || !std::isfinite(spec.p0)) throw ValidationError("initial label must be finite");
    const auto classical = classical_trajectory(spec.x0, spec.p0, spec.kind, spec.t_final, spec.dt);
    double r2_max = 0.0;
    for (const auto& [x, p] : classical) r2_max = std::max(r2_max, x * x + p * p);

    std::vector<TrajectoryDeviation> out;
    for (double hbar : spec.hbar_grid) {
        TrajectoryDeviation row;
        row.hbar = hbar;
        row.n_levels = spec.n_policy.levels_for(0.5 * r2_max / hbar);
        const auto [p_orig, x_orig] = unrelabel(spec.p0, spec.x0, hbar);
        const fock::ComplexVector psi0 = coherent_amplitudes(p_orig, x_orig, row.n_levels);
        const fock::SparseMatrix xs = fock::sparse_position(row.n_levels, hbar);
        const fock::SparseMatrix ps = fock::sparse_momentum(row.n_levels, hbar);
        const fock::SparseMatrix h = fock::sparse_hamiltonian(spec.kind, row.n_levels, hbar);
        std::size_t sample = 0;
        projective::evolve_sparse(h, hbar, psi0, spec.t_final, spec.dt,
                                  [&](double, const fock::ComplexVector& psi) {
                                      const double ex = psi.dot(xs * psi).real();
                                      const double ep = psi.dot(ps * psi).real();
                                      const auto& [xc, pc] = classical.at(sample++);
                                      row.max_deviation = std::max(row.max_deviation, std::hypot(ex - xc, ep - pc));
                                  });
        out.push_back(row);
    }
    return out;
}

PositionContractionReport position_basis_contraction(const PositionGridSpec& grid, const std::vector<double>& hbar_grid) {
    validate_hbar_grid(hbar_grid);
    if (grid.n_points < 2 || !(grid.spacing > 0.0)) throw ValidationError("invalid position grid");
    if (grid.centers.size() < 2) throw ValidationError("need at least two centres");
    const double half = 0.5 * double(grid.n_points) * grid.spacing;
    double d_min = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < grid.centers.size(); ++a) {
        if (!(std::abs(grid.centers[a]) < half)) throw ValidationError("centre lies outside the grid");
        for (std::size_t b = a + 1; b < grid.centers.size(); ++b) {
            d_min = std::min(d_min, std::abs(grid.centers[a] - grid.centers[b]));
        }
    }
    PositionContractionReport report;
    report.resolution_warning = grid.spacing > std::sqrt(0.5 * hbar_grid.back());
    Eigen::VectorXd y(Eigen::Index(grid.n_points));
    for (std::size_t j = 0; j < grid.n_points; ++j) y(Eigen::Index(j)) = (double(j) - double(grid.n_points / 2)) * grid.spacing;

    for (double hbar : hbar_grid) {
        const double sigma = std::sqrt(0.5 * hbar);
        std::vector<coherent::GridWavefunction> states;
        for (double c : grid.centers) states.push_back(coherent::grid_gaussian(grid.n_points, grid.spacing, c, sigma));
        PositionContractionRow row;
        row.hbar = hbar;
        row.log10_analytic_overlap = d_min > 0.0 ? -d_min * d_min / (4.0 * hbar) / std::numbers::ln10 : 0.0;
        for (std::size_t a = 0; a < states.size(); ++a) {
            const auto& sa = states[a].samples;
            const fock::Complex diag = grid.spacing * sa.dot((y.cast<fock::Complex>().array() * sa.array()).matrix());
            row.max_diag_error = std::max(row.max_diag_error, std::abs(diag.real() - grid.centers[a]));
            for (std::size_t b = 0; b < states.size(); ++b) {
                if (a == b) continue;
                const auto& sb = states[b].samples;
                const double ov = std::abs(grid.spacing * sa.dot(sb));
                const double mx = std::abs(grid.spacing * sa.dot((y.cast<fock::Complex>().array() * sb.array()).matrix()));
                row.max_offdiag_overlap = std::max(row.max_offdiag_overlap, ov);
                row.max_offdiag_x = std::max(row.max_offdiag_x, mx);
            }
        }
        if (row.max_offdiag_overlap < kUnderflowFloor) {
            row.max_offdiag_overlap = 0.0;
            row.underflow = true;
        }
        report.rows.push_back(row);
    }
    return report;
}

void write_decay_csv(std::ostream& out, const DecayReport& report) {
    CsvWriter csv(out);
    csv.header({"hbar", "abs_overlap", "offdiag_x", "offdiag_p", "abs_overlap_numeric"});
    for (const auto& r : report.rows)
        csv.row({r.hbar, r.abs_overlap, r.offdiag_x, r.offdiag_p,
                 r.abs_overlap_numeric.value_or(std::numeric_limits<double>::quiet_NaN())});
}

void write_deviation_csv(std::ostream& out, const std::vector<TrajectoryDeviation>& rows) {
    CsvWriter csv(out);
    csv.header({"hbar", "max_traj_dev"});
    for (const auto& r : rows) csv.row({r.hbar, r.max_deviation});
}

}  // namespace qspace::contraction
