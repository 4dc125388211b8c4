#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "qspace/errors.hpp"
#include "qspace/fock.hpp"

using namespace qspace;
using namespace qspace::fock;
using testing::cd;

TEST_CASE("ladder operators act on the number basis") {
    const std::size_t n = 12;
    const auto l = build_ladder(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto e = StateVector::basis(n, k).amplitudes();
        ComplexVector down = ComplexVector::Zero(Eigen::Index(n)), up = ComplexVector::Zero(Eigen::Index(n));
        if (k > 0) down(Eigen::Index(k - 1)) = std::sqrt(double(k));
        if (k + 1 < n) up(Eigen::Index(k + 1)) = std::sqrt(double(k + 1));
        CHECK(testing::max_abs(l.a.matrix() * e - down) <= 1e-15);
        CHECK(testing::max_abs(l.a_dag.matrix() * e - up) <= 1e-15);
    }
    CHECK_THROWS_AS(build_ladder(1), ValidationError);
}

TEST_CASE("truncated canonical commutator") {
    for (double hbar : {1.0, 0.3, 1e-3}) {
        const std::size_t n = 64;
        const auto q = build_xp(n, hbar);
        const auto d = commutator_defect(q.x, q.p);
        CHECK(d.interior_max <= 1e-12);
        CHECK(std::abs(d.corner - cd(0.0, -hbar * double(n))) <= 1e-10);
        // Direct evaluation of [X,P] - i hbar.
        const ComplexMatrix c = q.x.matrix() * q.p.matrix() - q.p.matrix() * q.x.matrix();
        ComplexMatrix expect = cd(0.0, hbar) * ComplexMatrix::Identity(Eigen::Index(n), Eigen::Index(n));
        expect(Eigen::Index(n - 1), Eigen::Index(n - 1)) = cd(0.0, -hbar * double(n - 1));
        CHECK(testing::max_abs(c - expect) <= 1e-12);
    }
}

TEST_CASE("quadratures are Hermitian and Hamiltonians real") {
    const auto q = build_xp(20, 0.5);
    CHECK(q.x.is_hermitian());
    CHECK(q.p.is_hermitian());
    for (const auto& kind : {HamiltonianKind::harmonic(), HamiltonianKind::free_particle(), HamiltonianKind::quartic(0.1)}) {
        const auto h = build_hamiltonian(kind, 20, 0.5);
        CHECK(h.is_hermitian());
        CHECK(h.matrix().imag().cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK_THROWS_AS(build_hamiltonian(HamiltonianKind::quartic(-1.0), 8), ValidationError);
    CHECK_THROWS_AS(build_xp(8, 0.0), ValidationError);
}

TEST_CASE("harmonic spectrum away from the cutoff") {
    const std::size_t n = 16;
    const double hbar = 0.2;
    const auto h = build_hamiltonian(HamiltonianKind::harmonic(), n, hbar).matrix();
    for (std::size_t k = 0; k + 1 < n; ++k) CHECK(h(Eigen::Index(k), Eigen::Index(k)).real() == doctest::Approx(hbar * (double(k) + 0.5)));
    CHECK(h(Eigen::Index(n - 1), Eigen::Index(n - 1)).real() == doctest::Approx(0.5 * hbar * double(n - 1)));
    ComplexMatrix off = h;
    off.diagonal().setZero();
    CHECK(testing::max_abs(off) <= 1e-14);
}

TEST_CASE("quartic matrix elements match the ladder expansion") {
    // <k|X^4|k> = (hbar/2)^2 (6k^2 + 6k + 3) for k well inside the cutoff.
    const double hbar = 0.7, lambda = 0.3;
    const auto h = build_hamiltonian(HamiltonianKind::quartic(lambda), 24, hbar).matrix();
    for (int k = 0; k < 10; ++k) {
        const double x4 = 0.25 * hbar * hbar * (6.0 * k * k + 6.0 * k + 3.0);
        CHECK(h(k, k).real() == doctest::Approx(hbar * (k + 0.5) + lambda * x4));
    }
}

TEST_CASE("sparse operators equal the dense ones") {
    const std::size_t n = 30;
    const double hbar = 0.4;
    const auto q = build_xp(n, hbar);
    CHECK(testing::max_abs(ComplexMatrix(sparse_position(n, hbar)) - q.x.matrix()) == 0.0);
    CHECK(testing::max_abs(ComplexMatrix(sparse_momentum(n, hbar)) - q.p.matrix()) == 0.0);
    for (const auto& kind : {HamiltonianKind::harmonic(), HamiltonianKind::free_particle(), HamiltonianKind::quartic(0.2)})
        CHECK(testing::max_abs(ComplexMatrix(sparse_hamiltonian(kind, n, hbar)) - build_hamiltonian(kind, n, hbar).matrix()) <= 1e-13);
}

TEST_CASE("vacuum moments") {
    const double hbar = 0.05;
    const auto q = build_xp(10, hbar);
    const auto vac = StateVector::vacuum(10);
    CHECK(std::abs(expectation(q.x, vac)) <= 1e-16);
    CHECK(variance(q.x, vac) == doctest::Approx(hbar / 2));
    CHECK(variance(q.p, vac) == doctest::Approx(hbar / 2));
    CHECK(vac.is_normalized());
    CHECK_THROWS_AS(StateVector::basis(4, 4), ValidationError);
    CHECK(StateVector(ComplexVector::Constant(4, cd(2.0))).normalized().is_normalized());
}

TEST_CASE("tensor product is the Kronecker product") {
    const auto l = build_ladder(3);
    const auto k = tensor_product(l.a, l.a_dag);
    CHECK(k.n_levels() == 9);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    CHECK(k.matrix()(3 * i + r, 3 * j + c) == l.a.matrix()(i, j) * l.a_dag.matrix()(r, c));
}

TEST_CASE("operator CSV round-trips and rejects malformed input") {
    const auto q = build_xp(6, 0.5);
    std::stringstream ss;
    write_operator_csv(ss, q.p);
    const auto back = read_operator_csv(ss, 0.5, "P");
    CHECK(testing::max_abs(back.matrix() - q.p.matrix()) == 0.0);

    std::istringstream bad("row,col,re,im\n0,0,1,0\n0,1,abc,0\n");
    try {
        read_operator_csv(bad, 1.0, "H");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream short_row("0,0,1\n");
    CHECK_THROWS_AS(read_operator_csv(short_row, 1.0, "H"), ParseError);
}

TEST_CASE("Hermiticity defect of a random matrix") {
    const auto h = testing::random_hermitian(7);
    CHECK(hermiticity_defect(h) == 0.0);
    ComplexMatrix m = h;
    m(0, 1) += cd(0.0, 0.5);
    CHECK(hermiticity_defect(m) == doctest::Approx(0.5));
}
