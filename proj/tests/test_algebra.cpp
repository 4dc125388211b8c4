#include <doctest.h>

#include <Eigen/Dense>
#include <sstream>

#include "oracles.hpp"
#include "qspace/algebra.hpp"
#include "qspace/coset.hpp"
#include "qspace/errors.hpp"

using namespace qspace;
using namespace qspace::algebra;
using testing::cd;

namespace {

std::set<std::string> xp_names() { return {"X1", "X2", "X3", "P1", "P2", "P3"}; }

// Matrix realization on the phase-space coset, one 8x8 matrix per generator of
// the Heisenberg-extended table (J, X, P, I).
std::vector<Eigen::MatrixXcd> phase_realization() {
    std::vector<Eigen::MatrixXcd> rho;
    const cd i(0.0, 1.0);
    for (int k = 0; k < 3; ++k) {
        coset::InfinitesimalElement e;
        e.omega = coset::rotation_generator(coset::Vec3::Unit(k));
        rho.push_back(coset::phase_generator(e).cast<cd>());
    }
    for (int k = 0; k < 3; ++k) {
        coset::InfinitesimalElement e;
        e.pbar = coset::Vec3::Unit(k);
        rho.push_back(-i * coset::phase_generator(e).cast<cd>());
    }
    for (int k = 0; k < 3; ++k) {
        coset::InfinitesimalElement e;
        e.xbar = coset::Vec3::Unit(k);
        rho.push_back(i * coset::phase_generator(e).cast<cd>());
    }
    coset::InfinitesimalElement e;
    e.thetabar = 1.0;
    rho.push_back(-i * coset::phase_generator(e).cast<cd>());
    return rho;
}

}  // namespace

TEST_CASE("shipped tables satisfy antisymmetry and Jacobi") {
    for (bool with_time : {false, true}) {
        for (const auto& tbl : {galilei_spatial_table(with_time), heisenberg_rotation_table(with_time)}) {
            CHECK(antisymmetry_defect(tbl) == 0.0);
            CHECK(jacobi_defect(tbl) <= kExactTolerance);
        }
    }
    CHECK(galilei_spatial_table().dim() == 9);
    CHECK(heisenberg_rotation_table().dim() == 10);
    CHECK(heisenberg_rotation_table(true).dim() == 11);
}

TEST_CASE("Heisenberg table matches the commutators of its matrix realization") {
    const auto tbl = heisenberg_rotation_table();
    const auto rho = phase_realization();
    REQUIRE(rho.size() == tbl.dim());
    // Columns are the flattened generator matrices; decompose commutators by least squares.
    Eigen::MatrixXcd basis(64, Eigen::Index(rho.size()));
    for (std::size_t g = 0; g < rho.size(); ++g) basis.col(Eigen::Index(g)) = rho[g].reshaped();
    const auto qr = basis.colPivHouseholderQr();
    REQUIRE(qr.rank() == Eigen::Index(rho.size()));
    for (std::size_t a = 0; a < rho.size(); ++a)
        for (std::size_t b = 0; b < rho.size(); ++b) {
            const Eigen::MatrixXcd comm = rho[a] * rho[b] - rho[b] * rho[a];
            const Eigen::VectorXcd coeff = qr.solve(Eigen::VectorXcd(comm.reshaped()));
            CHECK(testing::max_abs(basis * coeff - comm.reshaped()) <= 1e-12);
            for (std::size_t e = 0; e < rho.size(); ++e)
                CHECK(std::abs(coeff(Eigen::Index(e)) - tbl.coefficient(a, b, e)) <= 1e-12);
        }
}

TEST_CASE("rotation brackets follow the Levi-Civita convention") {
    const auto tbl = heisenberg_rotation_table();
    const auto jx = bracket(tbl.id("J3"), tbl.id("X1"), tbl);
    REQUIRE(jx.size() == 1);
    CHECK(tbl.names()[jx[0].generator] == "X2");
    CHECK(jx[0].coeff == cd(1.0));
    const auto xp = bracket(tbl.id("X2"), tbl.id("P2"), tbl);
    REQUIRE(xp.size() == 1);
    CHECK(tbl.names()[xp[0].generator] == "I");
    CHECK(xp[0].coeff == cd(0.0, 1.0));
    CHECK(bracket(tbl.id("X1"), tbl.id("P2"), tbl).empty());
    CHECK(is_central(tbl, tbl.id("I").index));
    CHECK_FALSE(is_central(tbl, tbl.id("X1").index));
}

TEST_CASE("with_central_u1 appends a central generator") {
    const auto tbl = with_central_u1(galilei_spatial_table(), "M");
    CHECK(tbl.dim() == 10);
    CHECK(is_central(tbl, tbl.id("M").index));
    CHECK(jacobi_defect(tbl) == 0.0);
    CHECK_THROWS_AS(with_central_u1(tbl, "M"), ValidationError);
}

TEST_CASE("contraction rescales [X,P] by 1/k^2") {
    const auto tbl = heisenberg_rotation_table();
    const auto c = contract(tbl, ContractionParams::heisenberg(10.0));
    const auto xp = bracket(c.id("X1"), c.id("P1"), c);
    REQUIRE(xp.size() == 1);
    CHECK(std::abs(xp[0].coeff - cd(0.0, 0.01)) <= 1e-15);
    // Rotations act on the rescaled generators unchanged.
    CHECK(c.coefficient(c.id("J1").index, c.id("X2").index, c.id("X3").index) == cd(1.0));
    CHECK(ContractionParams::heisenberg(10.0).hbar() == doctest::Approx(0.01));
}

TEST_CASE("finite contractions stay Lie algebras and invert") {
    const auto tbl = heisenberg_rotation_table(true);
    for (int trial = 0; trial < 50; ++trial) {
        const double k = std::exp(testing::uniform(0.0, std::log(1e3)));
        const ContractionParams params(k, xp_names());
        const auto c = contract(tbl, params);
        CHECK(jacobi_defect(c) <= kExactTolerance);
        CHECK(max_difference(uncontract(c, params), tbl) <= 1e-12);
    }
}

TEST_CASE("contraction limit abelianizes X and P") {
    const auto lim = contraction_limit(heisenberg_rotation_table(), xp_names());
    for (const char* x : {"X1", "X2", "X3"})
        for (const char* p : {"P1", "P2", "P3"}) CHECK(bracket(lim.id(x), lim.id(p), lim).empty());
    const std::size_t i = lim.id("I").index;
    CHECK(is_central(lim, i));
    for (std::size_t a = 0; a < lim.dim(); ++a)
        for (std::size_t b = 0; b < lim.dim(); ++b) CHECK(lim.coefficient(a, b, i) == cd(0.0));
    CHECK(jacobi_defect(lim) == 0.0);
    CHECK(max_difference(contract(heisenberg_rotation_table(), ContractionParams::limit(xp_names())), lim) == 0.0);
}

TEST_CASE("contraction limit reports divergent constants") {
    // Scaling only P leaves [X_i, T] = i P_i with a positive power of k.
    CHECK_THROWS_AS(contraction_limit(galilei_spatial_table(true), {"P1", "P2", "P3"}), LimitError);
}

TEST_CASE("contraction parameters are validated") {
    CHECK_THROWS_AS(ContractionParams(0.0, xp_names()), ValidationError);
    CHECK_THROWS_AS(ContractionParams(-2.0, xp_names()), ValidationError);
    CHECK_THROWS_AS(ContractionParams(0.5, xp_names()), ValidationError);
    CHECK_THROWS_AS(contract(heisenberg_rotation_table(), ContractionParams(2.0, {"Q7"})), ValidationError);
    CHECK(ContractionParams::limit(xp_names()).is_limit());
    CHECK(ContractionParams::limit(xp_names()).hbar() == 0.0);
}

TEST_CASE("Jacobi check rejects malformed tables") {
    TableBuilder broken(galilei_spatial_table());
    broken.raw(0, 1, 2, cd(2.0));
    CHECK_THROWS_AS(jacobi_defect(broken.build()), ValidationError);

    TableBuilder rescaled(galilei_spatial_table());
    rescaled.bracket("J1", "J2", {{"J3", cd(2.0)}});
    CHECK(jacobi_defect(rescaled.build()) > 0.5);
}

TEST_CASE("text format round-trips") {
    for (const auto& tbl : {galilei_spatial_table(true), heisenberg_rotation_table(true),
                            contract(heisenberg_rotation_table(), ContractionParams::heisenberg(7.0))}) {
        const auto back = parse_table(to_text(tbl));
        CHECK(back.names() == tbl.names());
        CHECK(max_difference(back, tbl) == 0.0);
    }
    const auto t = parse_table("# two generators\ngenerators: A, B, C\n[A,B] = (1+2i)*C - 0.5*A\n");
    CHECK(t.coefficient(0, 1, 2) == cd(1.0, 2.0));
    CHECK(t.coefficient(1, 0, 2) == cd(-1.0, -2.0));
    CHECK(t.coefficient(0, 1, 0) == cd(-0.5));
    CHECK(parse_table("generators: A B\n[A,B] = i*A\n").coefficient(0, 1, 0) == cd(0.0, 1.0));
    // Bare names carry a unit coefficient; a leading sign applies to the first term.
    const auto bare = parse_table("generators: A B C\n[A,B] = -C + 2*A - B\n");
    CHECK(bare.coefficient(0, 1, 2) == cd(-1.0));
    CHECK(bare.coefficient(0, 1, 0) == cd(2.0));
    CHECK(bare.coefficient(0, 1, 1) == cd(-1.0));
}

TEST_CASE("parse errors carry a location") {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            parse_table(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("generators: A B\n[A,Z] = A\n") == 2);
    CHECK(line_of("generators: A B\n[A,A] = A\n") == 2);
    CHECK(line_of("generators: A B\n[A,B] = A\n[A,B] = B\n") == 3);
    CHECK(line_of("[A,B] = A\ngenerators: A B\n") == 1);
    CHECK(line_of("generators: A B\n\n[A,B] =\n") == 3);
    CHECK(line_of("generators: A B\n[A,B] = 1.2.3*A\n") == 2);
    std::istringstream in("generators: A\n[A,");
    CHECK_THROWS_AS(read_table(in), ParseError);
}

TEST_CASE("coefficients format compactly") {
    CHECK(format_coefficient(cd(1.0)) == "1");
    CHECK(format_coefficient(cd(0.0, 1.0)) == "1i");
    CHECK(format_coefficient(cd(0.0, 0.01)) == "0.01i");
    CHECK(parse_table("generators: A B\n[A,B] = " + format_coefficient(cd(0.25, -3.0)) + "*A\n").coefficient(0, 1, 0) ==
          cd(0.25, -3.0));
}
