#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "qspace/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = qspace::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qspace_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("algebra verify passes and lists the rescaled bracket") {
    const auto dir = scratch("algebra");
    const auto r = run({"algebra", "verify", "--k", "10", "--out-dir", dir.string()});
    CHECK(r.code == 0);
    const std::string brackets = slurp(dir / "algebra_brackets.csv");
    CHECK(brackets.find("heisenberg_rotation_k10,X1,P1,I,0,0.01\n") != std::string::npos);
    const auto summary = json::parse(slurp(dir / "algebra_verify.json"));
    CHECK(summary["pass"] == true);
    CHECK(summary["version"] == qspace::cli::kVersion);
    CHECK(summary["config"]["k"] == json::array({10.0}));
    for (const auto& t : summary["results"]["tables"]) CHECK(t["jacobi_defect"].get<double>() <= 1e-12);
    CHECK(summary["results"]["limit"]["max_xp_bracket"] == 0.0);
}

TEST_CASE("corrupted table file is an input error with a location") {
    const auto dir = scratch("badtable");
    std::ofstream(dir / "bad.txt") << "generators: A B\n[A,B] = 2*C\n";
    const auto r = run({"algebra", "verify", "--table", (dir / "bad.txt").string(), "--out-dir", dir.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("an invalid Lie table is a tolerance failure") {
    const auto dir = scratch("jacobi");
    std::ofstream(dir / "t.txt") << "generators: A B C\n[A,B] = 2*C\n[B,C] = A\n[C,A] = B\n";
    const auto r = run({"algebra", "verify", "--table", (dir / "t.txt").string(), "--out-dir", dir.string()});
    CHECK(r.code == 0);  // so(3) with a rescaled generator is still a Lie algebra
    std::ofstream(dir / "u.txt") << "generators: A B C\n[A,B] = A\n[A,C] = B\n";
    const auto bad = run({"algebra", "verify", "--table", (dir / "u.txt").string(), "--out-dir", dir.string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("input") != std::string::npos);
}

TEST_CASE("coset orbit: boost and phase rows") {
    const auto dir = scratch("orbit");
    CHECK(run({"coset", "orbit", "--coset", "spacetime", "--v", "0.5,0,0", "--t0", "2", "--steps", "4", "--out-dir",
               dir.string()})
              .code == 0);
    auto rows = csv_rows(dir / "coset_orbit.csv");
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == std::vector<std::string>{"step", "s", "t", "x1", "x2", "x3"});
    // dx/ds = v t with t fixed at 2.
    for (std::size_t n = 1; n < rows.size(); ++n) CHECK(std::stod(rows[n][3]) == doctest::Approx(0.1 * double(n - 1)));

    CHECK(run({"coset", "orbit", "--coset", "phase", "--pbar", "1,0,0", "--x0", "3,0,0", "--steps", "3", "--ds", "1",
               "--out-dir", dir.string()})
              .code == 0);
    rows = csv_rows(dir / "coset_orbit.csv");
    // theta(s) = s pbar.x / 2 with x unchanged.
    for (std::size_t n = 1; n < rows.size(); ++n) CHECK(std::stod(rows[n].back()) == doctest::Approx(1.5 * double(n - 1)));

    CHECK(run({"coset", "orbit", "--coset", "moebius", "--out-dir", dir.string()}).code == 1);
    CHECK(run({"coset", "orbit", "--coset", "phase", "--mode", "finite", "--out-dir", dir.string()}).code == 1);
}

TEST_CASE("contract sweep") {
    const auto dir = scratch("sweep");
    CHECK(run({"contract", "sweep", "--out-dir", dir.string()}).code == 0);
    const auto summary = json::parse(slurp(dir / "contract_sweep.json"));
    const auto& pair = summary["results"]["pairs"][0];
    CHECK(pair["fitted_slope"].get<double>() == doctest::Approx(-0.25).epsilon(1e-3));
    CHECK(pair["max_numeric_difference"].get<double>() <= 1e-8);
    const auto rows = csv_rows(dir / "contract_sweep.csv");
    CHECK(rows[0] == std::vector<std::string>{"hbar", "abs_overlap", "offdiag_x", "offdiag_p", "abs_overlap_numeric"});
    CHECK(rows.size() == 8);

    const auto same = run({"contract", "sweep", "--pairs", "same", "--out-dir", dir.string()});
    CHECK(same.code == 1);
    CHECK(same.err.find("degenerate") != std::string::npos);
    CHECK(run({"contract", "sweep", "--pairs", "0,0,0", "--out-dir", dir.string()}).code == 1);
    CHECK(run({"contract", "sweep", "--numeric-tolerance", "1e-300", "--out-dir", dir.string()}).code == 2);
    CHECK(run({"contract", "sweep", "--pairs", "0,0,0,1;1,0,0,0", "--out-dir", dir.string()}).code == 0);
    CHECK(fs::exists(dir / "contract_sweep_pair1.csv"));
}

TEST_CASE("evolve") {
    const auto dir = scratch("evolve");
    CHECK(run({"evolve", "--out-dir", dir.string()}).code == 0);
    auto summary = json::parse(slurp(dir / "evolve.json"));
    CHECK(summary["results"]["max_deviation"].get<double>() <= 1e-6);

    CHECK(run({"evolve", "--t-final", "0", "--out-dir", dir.string()}).code == 0);
    auto rows = csv_rows(dir / "evolve.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].back() == "0");

    CHECK(run({"evolve", "--kind", "quartic", "--lambda", "0.1", "--t-final", "3", "--out-dir", dir.string()}).code == 0);
    rows = csv_rows(dir / "evolve.csv");
    const double e0 = std::stod(rows[1][6]);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::abs(std::stod(rows[i][6]) - e0) <= 1e-8);

    std::ofstream(dir / "h.csv") << "row,col,re,im\n0,0,1,0\n0,1,0.5,0\n1,1,2,0\n";
    const auto bad = run({"evolve", "--hamiltonian-file", (dir / "h.csv").string(), "--out-dir", dir.string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("Hermitian") != std::string::npos);
    CHECK(run({"evolve", "--tolerance", "1e-300", "--t-final", "1", "--out-dir", dir.string()}).code == 2);
    CHECK(run({"evolve", "--dt", "-1", "--out-dir", dir.string()}).code == 1);
}

TEST_CASE("contract classical") {
    const auto dir = scratch("classical");
    CHECK(run({"contract", "classical", "--hbar-grid", "1,0.01", "--t-final", "1", "--out-dir", dir.string()}).code == 0);
    const auto rows = csv_rows(dir / "contract_classical.csv");
    CHECK(rows[0] == std::vector<std::string>{"hbar", "max_traj_dev"});
    CHECK(rows.size() == 3);
    CHECK(run({"contract", "classical", "--kind", "free", "--out-dir", dir.string()}).code == 1);
    CHECK(run({"contract", "classical", "--hbar-grid", "0.1,1", "--out-dir", dir.string()}).code == 1);
}

TEST_CASE("outputs embed the version and resolved config") {
    const auto dir = scratch("embed");
    CHECK(run({"contract", "classical", "--hbar-grid", "1", "--t-final", "0.5", "--seed", "7", "--out-dir",
               dir.string()})
              .code == 0);
    const std::string csv = slurp(dir / "contract_classical.csv");
    CHECK(csv.rfind(std::string("# qspace ") + qspace::cli::kVersion + "\n# config {", 0) == 0);
    CHECK(csv.find("\"seed\":7") != std::string::npos);
    CHECK(csv.find("\"t_final\":0.5") != std::string::npos);
}

TEST_CASE("repeated runs are byte-identical") {
    const auto dir = scratch("determinism");
    const std::vector<std::string> args{"evolve", "--kind", "quartic", "--t-final", "1", "--out-dir", dir.string()};
    REQUIRE(run(args).code == 0);
    const std::string csv = slurp(dir / "evolve.csv"), js = slurp(dir / "evolve.json");
    REQUIRE(run(args).code == 0);
    CHECK(slurp(dir / "evolve.csv") == csv);
    CHECK(slurp(dir / "evolve.json") == js);
}

TEST_CASE("config file sits between flags and defaults") {
    const auto dir = scratch("config");
    std::ofstream(dir / "run.cfg") << "# evolve settings\nt-final = 0.5\ndt = 0.01 # coarse\nkind = quartic\nn = 12\nx0 = 0.5\nconservation-tolerance = 1e-3\n";
    CHECK(run({"evolve", "--config", (dir / "run.cfg").string(), "--dt", "0.05", "--out-dir", dir.string()}).code == 0);
    const auto cfg = json::parse(slurp(dir / "evolve.json"))["config"];
    CHECK(cfg["t_final"] == 0.5);
    CHECK(cfg["dt"] == 0.05);
    CHECK(cfg["kind"] == "quartic");
    std::ofstream(dir / "bad.cfg") << "t-final 3\n";
    CHECK(run({"evolve", "--config", (dir / "bad.cfg").string(), "--out-dir", dir.string()}).code == 1);
    std::ofstream(dir / "unknown.cfg") << "colour = blue\n";
    CHECK(run({"evolve", "--config", (dir / "unknown.cfg").string(), "--out-dir", dir.string()}).code == 1);
}

TEST_CASE("output directory from the environment") {
    const auto dir = scratch("env");
    ::setenv(qspace::cli::kOutDirEnv, dir.string().c_str(), 1);
    const auto r = run({"algebra", "verify"});
    ::unsetenv(qspace::cli::kOutDirEnv);
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "algebra_verify.json"));
}

TEST_CASE("json format embeds rows and skips CSV") {
    const auto dir = scratch("json");
    CHECK(run({"contract", "classical", "--hbar-grid", "1", "--t-final", "0.2", "--format", "json", "--out-dir",
               dir.string()})
              .code == 0);
    CHECK_FALSE(fs::exists(dir / "contract_classical.csv"));
    CHECK(json::parse(slurp(dir / "contract_classical.json")).contains("rows"));
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == 1);
    CHECK(run({"bogus"}).code == 1);
    CHECK(run({"evolve", "--n", "abc"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}
