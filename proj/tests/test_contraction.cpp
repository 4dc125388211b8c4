#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qspace/contraction.hpp"
#include "qspace/errors.hpp"

using namespace qspace;
using namespace qspace::contraction;
using coherent::CoherentLabel;

namespace {

const std::vector<double> kDecayGrid{1, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01};

}  // namespace

TEST_CASE("relabeling") {
    auto [p, x] = relabel(3.0, 5.0, 0.01);
    CHECK(p == doctest::Approx(0.3));
    CHECK(x == doctest::Approx(0.5));
    CHECK(relabel(3.0, 5.0, 1.0) == std::pair{3.0, 5.0});
    for (int trial = 0; trial < 100; ++trial) {
        const double hbar = std::exp(testing::uniform(-10, 1)), p0 = testing::uniform(-5, 5), x0 = testing::uniform(-5, 5);
        const auto [pt, xt] = relabel(p0, x0, hbar);
        const auto [pb, xb] = unrelabel(pt, xt, hbar);
        CHECK(std::abs(pb - p0) <= 1e-14 * std::max(1.0, std::abs(p0)));
        CHECK(std::abs(xb - x0) <= 1e-14 * std::max(1.0, std::abs(x0)));
    }
    CHECK_THROWS_AS(relabel(1.0, 1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(unrelabel(1.0, 1.0, -1.0), ValidationError);
}

TEST_CASE("rescaled position expectation equals the relabeled coordinate") {
    const double hbar = 0.05, pt = -0.3, xt = 0.4;
    const auto [p, x] = unrelabel(pt, xt, hbar);
    const auto psi = coherent::coherent_state(CoherentLabel::axis(p, x), 96);
    const auto q = fock::build_xp(96, hbar);
    CHECK(fock::expectation(q.x, psi).real() == doctest::Approx(xt).epsilon(1e-12));
    CHECK(fock::expectation(q.p, psi).real() == doctest::Approx(pt).epsilon(1e-12));
}

TEST_CASE("N policy") {
    const NPolicy policy;
    CHECK(policy.levels_for(0.0) == 64);
    CHECK(policy.levels_for(10.0) == 90);
    CHECK(policy.levels_for(7.01) == 64);
    for (double a2 : {1.0, 8.0, 25.0, 60.0}) CHECK(coherent::fock_tail_mass(a2, policy.levels_for(a2)) < 1e-12);
}

TEST_CASE("line fit recovers exact data") {
    const auto fit = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.slope_stderr == doctest::Approx(0.0));
    CHECK(std::isnan(fit_line({1, 2}, {0, 1}).slope_stderr));
    CHECK_THROWS_AS(fit_line({1, 1}, {0, 1}), ValidationError);
}

TEST_CASE("decay slope recovers -Delta^2/4") {
    SweepSpec spec{kDecayGrid, {}, {}};
    for (auto [dp, dx] : {std::pair{0.0, 0.5}, {0.0, 1.0}, {1.0, 1.0}, {0.6, -0.8}, {2.0, 0.0}, {-1.2, 1.6}})
        spec.label_pairs.push_back({CoherentLabel::axis(0.1, -0.2), CoherentLabel::axis(0.1 + dp, -0.2 + dx)});
    const auto reports = overlap_decay_sweep(spec);
    REQUIRE(reports.size() == spec.label_pairs.size());
    for (const auto& r : reports) {
        CHECK(r.relative_error() <= 1e-3);
        CHECK(r.max_numeric_difference() <= 1e-8);
        for (std::size_t i = 1; i < r.rows.size(); ++i) {
            CHECK(r.rows[i].abs_overlap < r.rows[i - 1].abs_overlap);
            CHECK(r.rows[i].offdiag_x < r.rows[i - 1].offdiag_x);
        }
        for (const auto& row : r.rows) {
            CHECK(row.abs_overlap >= 0.0);
            CHECK(row.abs_overlap <= 1.0);
        }
    }
    // Small-hbar rows exceed the numeric cap and are analytic only.
    CHECK_FALSE(reports[1].rows.back().abs_overlap_numeric.has_value());
    CHECK(reports[1].rows.front().abs_overlap_numeric.has_value());
    CHECK(reports[1].expected_slope == -0.25);
}

TEST_CASE("identical labels give unit overlap but no fit") {
    const LabelPair same{CoherentLabel::axis(0.2, 0.3), CoherentLabel::axis(0.2, 0.3)};
    for (const auto& row : decay_rows(same, kDecayGrid, {})) CHECK(row.abs_overlap == doctest::Approx(1.0));
    CHECK_THROWS_AS(overlap_decay_sweep({kDecayGrid, {same}, {}}), ValidationError);
}

TEST_CASE("sweep specs are validated") {
    const LabelPair pair{CoherentLabel::axis(0, 0), CoherentLabel::axis(0, 1)};
    CHECK_THROWS_AS(overlap_decay_sweep({{}, {pair}, {}}), ValidationError);
    CHECK_THROWS_AS(overlap_decay_sweep({{0.1, 1.0}, {pair}, {}}), ValidationError);
    CHECK_THROWS_AS(overlap_decay_sweep({{1.0, 0.0}, {pair}, {}}), ValidationError);
    CHECK_THROWS_AS(overlap_decay_sweep({kDecayGrid, {}, {}}), ValidationError);
}

TEST_CASE("off-diagonal suppression") {
    const std::vector<CoherentLabel> labels{CoherentLabel::axis(0, 0), CoherentLabel::axis(0, 1)};
    CHECK(diagonalization_diagnostic(labels, 1.0).ratio() > 0.1);
    CHECK(diagonalization_diagnostic(labels, 0.01).ratio() < 1e-10);
    // Closed form for this pair: |<a|X|b>| = |x_a + x_b|/2 e^{-1/4 hbar}.
    CHECK(diagonalization_diagnostic(labels, 0.5).ratio_x == doctest::Approx(0.5 * std::exp(-0.5)));
    double prev = 1e300;
    for (double hbar : {1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3}) {
        const double r = diagonalization_diagnostic(labels, hbar).ratio();
        CHECK(r < prev);
        prev = r;
    }
    CHECK(prev < 1e-8);
    CHECK_THROWS_AS(diagonalization_diagnostic({labels[0]}, 1.0), ValidationError);
    CHECK_THROWS_AS(diagonalization_diagnostic({labels[0], labels[0]}, 1.0), ValidationError);
}

TEST_CASE("harmonic coherent centres follow the classical flow at every hbar") {
    EmergenceSpec spec;
    spec.hbar_grid = {1.0, 0.1, 0.01, 1e-3};
    const auto rows = classical_trajectory_emergence(spec);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) CHECK(r.max_deviation <= 1e-6);
}

TEST_CASE("quartic deviations shrink with hbar") {
    EmergenceSpec spec;
    spec.hbar_grid = {1.0, 0.1, 0.01, 1e-3};
    spec.kind = fock::HamiltonianKind::quartic(0.1);
    const auto rows = classical_trajectory_emergence(spec);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].max_deviation <= rows[i - 1].max_deviation);
    CHECK(rows.front().max_deviation >= 10.0 * rows.back().max_deviation);
}

TEST_CASE("classical trajectory and degenerate emergence runs") {
    // Harmonic flow is a rotation.
    const auto traj = classical_trajectory(1.0, 0.0, fock::HamiltonianKind::harmonic(), 1.0, 0.1);
    REQUIRE(traj.size() == 11);
    CHECK(traj.back().first == doctest::Approx(std::cos(1.0)).epsilon(1e-9));
    CHECK(traj.back().second == doctest::Approx(-std::sin(1.0)).epsilon(1e-9));
    EmergenceSpec spec;
    spec.hbar_grid = {1.0, 0.1};
    spec.t_final = 0.0;
    spec.kind = fock::HamiltonianKind::quartic(0.1);
    for (const auto& r : classical_trajectory_emergence(spec)) CHECK(r.max_deviation <= 1e-15);
    spec.kind = fock::HamiltonianKind::free_particle();
    CHECK_THROWS_AS(classical_trajectory_emergence(spec), ValidationError);
}

TEST_CASE("position-basis proxies become orthogonal") {
    const auto report = position_basis_contraction({}, {1.0, 0.01, 1e-4});
    CHECK_FALSE(report.resolution_warning);
    const auto& first = report.rows.front();
    // Gaussian overlap exp(-d^2 / 4 hbar) for d = 1.
    CHECK(first.max_offdiag_overlap == doctest::Approx(std::exp(-0.25)).epsilon(1e-8));
    CHECK(report.rows[1].max_offdiag_overlap == doctest::Approx(std::exp(-25.0)).epsilon(1e-6));
    const auto& last = report.rows.back();
    CHECK(last.underflow);
    CHECK(last.max_offdiag_overlap == 0.0);
    CHECK(last.log10_analytic_overlap < -100.0);
    for (const auto& r : report.rows) CHECK(r.max_diag_error <= std::sqrt(r.hbar));

    const auto same = position_basis_contraction({1024, 0.01, {0.2, 0.2}}, {0.1});
    CHECK(same.rows[0].max_offdiag_overlap == doctest::Approx(1.0));

    CHECK(position_basis_contraction({1024, 0.05, {-0.5, 0.5}}, {0.1, 1e-3}).resolution_warning);
    CHECK_THROWS_AS(position_basis_contraction({1024, 0.01, {0.0}}, {0.1}), ValidationError);
    CHECK_THROWS_AS(position_basis_contraction({1024, 0.01, {0.0, 9.0}}, {0.1}), ValidationError);
}

TEST_CASE("report CSV layouts") {
    std::ostringstream dev;
    write_deviation_csv(dev, {{0.5, 1e-3, 64}});
    CHECK(dev.str() == "hbar,max_traj_dev\n0.5,0.001\n");
    DecayReport r;
    r.rows.push_back({1.0, 0.5, 0.25, 0.25, std::nullopt, 64});
    std::ostringstream dec;
    write_decay_csv(dec, r);
    CHECK(dec.str() == "hbar,abs_overlap,offdiag_x,offdiag_p,abs_overlap_numeric\n1,0.5,0.25,0.25,nan\n");
}
