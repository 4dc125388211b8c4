#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "qspace/coherent.hpp"
#include "qspace/fock.hpp"

namespace qspace::contraction {

using coherent::CoherentLabel;

// (p, x) -> (sqrt(hbar) p, sqrt(hbar) x).
std::pair<double, double> relabel(double p, double x, double hbar);
std::pair<double, double> unrelabel(double p_tilde, double x_tilde, double hbar);
// Per-axis relabeling of a whole label; theta is untouched.
CoherentLabel relabel(const CoherentLabel& label, double hbar);
CoherentLabel unrelabel(const CoherentLabel& label, double hbar);

/// Fock cutoff rule: N = max(min_levels, ceil(factor * |alpha|^2)). Numerical
/// (brute-force) evaluation is attempted only while N <= max_numeric.
struct NPolicy {
    std::size_t min_levels = 64;
    double factor = 9.0;
    std::size_t max_numeric = 256;

    std::size_t levels_for(double alpha_squared) const;
};

struct LabelPair {
    CoherentLabel first;
    CoherentLabel second;
};

struct SweepSpec {
    std::vector<double> hbar_grid;  // strictly positive, strictly descending
    std::vector<LabelPair> label_pairs;  // tilde labels
    NPolicy n_policy;
};

void validate(const SweepSpec& spec);
void validate_hbar_grid(const std::vector<double>& grid);

struct DecayRow {
    double hbar = 0.0;
    double abs_overlap = 0.0;
    double offdiag_x = 0.0;
    double offdiag_p = 0.0;
    std::optional<double> abs_overlap_numeric;
    std::size_t n_levels = 0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;  // NaN with fewer than three points
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct DecayReport {
    LabelPair labels;
    std::vector<DecayRow> rows;
    double fitted_slope = 0.0;
    double slope_stderr = 0.0;
    double expected_slope = 0.0;  // -((dx)^2 + (dp)^2)/4

    double relative_error() const;
    double max_numeric_difference() const;
};

// Rows for one pair; identical labels are allowed here (|overlap| = 1, no off-diagonal).
std::vector<DecayRow> decay_rows(const LabelPair& pair, const std::vector<double>& hbar_grid, const NPolicy& policy);

// Fits ln|overlap| against 1/hbar for every pair. Identical labels -> ValidationError (degenerate fit).
std::vector<DecayReport> overlap_decay_sweep(const SweepSpec& spec);

struct DiagonalizationResult {
    double ratio_x = 0.0;
    double ratio_p = 0.0;
    double ratio() const { return ratio_x > ratio_p ? ratio_x : ratio_p; }
};

/// max |<a|X^c|b>| (a != b) over the label set, divided by the smallest label separation,
/// with matrix elements from the closed forms. Same for P^c.
DiagonalizationResult diagonalization_diagnostic(const std::vector<CoherentLabel>& labels, double hbar);

struct EmergenceSpec {
    double x0 = 0.5;  // tilde labels
    double p0 = 0.0;
    std::vector<double> hbar_grid;
    fock::HamiltonianKind kind = fock::HamiltonianKind::harmonic();
    double t_final = 5.0;
    double dt = 1e-2;
    NPolicy n_policy;
};

struct TrajectoryDeviation {
    double hbar = 0.0;
    double max_deviation = 0.0;
    std::size_t n_levels = 0;
};

// Classical H(x, p) = p^2/2 + x^2/2 + lambda x^4 integrated by RK4; samples at multiples of dt.
std::vector<std::pair<double, double>> classical_trajectory(double x0, double p0, const fock::HamiltonianKind& kind,
                                                            double t_final, double dt);

/// Evolves |p0, x0> (tilde labels) under H^c built from X^c = sqrt(hbar) X, P^c = sqrt(hbar) P
/// and compares (<X^c>, <P^c>)(t) with the classical trajectory from (x0, p0).
std::vector<TrajectoryDeviation> classical_trajectory_emergence(const EmergenceSpec& spec);

struct PositionGridSpec {
    std::size_t n_points = 4096;
    double spacing = 0.0025;
    std::vector<double> centers{-0.5, 0.5};
};

struct PositionContractionRow {
    double hbar = 0.0;
    double max_offdiag_overlap = 0.0;   // numeric; values below 1e-100 are reported as 0
    bool underflow = false;
    double log10_analytic_overlap = 0.0;  // closest pair, exp(-d^2 / 4 hbar)
    double max_offdiag_x = 0.0;
    double max_diag_error = 0.0;  // max_a |<a|X^c|a> - c_a|
};

struct PositionContractionReport {
    std::vector<PositionContractionRow> rows;
    bool resolution_warning = false;  // grid spacing exceeds the narrowest Gaussian width
};

inline constexpr double kUnderflowFloor = 1e-100;

/// Proxies |x^c> by Gaussians of position variance hbar/2 centred on the given points and
/// tracks their overlaps and X^c matrix on the grid as hbar decreases.
PositionContractionReport position_basis_contraction(const PositionGridSpec& grid, const std::vector<double>& hbar_grid);

// `hbar,abs_overlap,offdiag_x,offdiag_p,abs_overlap_numeric`
void write_decay_csv(std::ostream& out, const DecayReport& report);
// `hbar,max_traj_dev`
void write_deviation_csv(std::ostream& out, const std::vector<TrajectoryDeviation>& rows);

}  // namespace qspace::contraction
