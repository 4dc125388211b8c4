#include "qspace/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>

#include "qspace/algebra.hpp"
#include "qspace/coherent.hpp"
#include "qspace/contraction.hpp"
#include "qspace/coset.hpp"
#include "qspace/csv.hpp"
#include "qspace/errors.hpp"
#include "qspace/fock.hpp"
#include "qspace/projective.hpp"

namespace qspace::cli {

namespace {

using nlohmann::json;

struct Globals {
    std::string out_dir = ".";
    std::string format = "csv";
    std::uint64_t seed = 20170201;
    std::string config;
};

struct CsvOutput {
    std::string file;
    std::function<void(std::ostream&)> write;
};

struct RunOutput {
    std::string name;  // file stem
    json config;
    json results;
    json rows;  // embedded in the summary only for --format json
    bool pass = true;
    std::string failure;
    std::vector<CsvOutput> csv;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text) {
    const std::string t = trim(text);
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("malformed number '" + t + "'");
    }
}

std::vector<double> parse_list(const std::string& text, char sep = ',') {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, sep))
        if (!trim(field).empty()) out.push_back(parse_number(field));
    return out;
}

coset::Vec3 parse_vec3(const std::string& text, const std::string& what) {
    const auto v = parse_list(text);
    if (v.size() != 3) throw ValidationError(what + " needs three comma-separated components");
    return {v[0], v[1], v[2]};
}

json vec_json(const coset::Vec3& v) { return json::array({v(0), v(1), v(2)}); }

// `key = value` lines become `--key value` unless the key was given on the command line.
std::vector<std::string> inject_config(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::vector<std::string> out = args;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line_no, 1);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line_no, 1);
        if (key == "config") throw ParseError("config files cannot include other config files", line_no, 1);
        const std::string flag = "--" + key;
        const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (given) continue;
        out.push_back(flag);
        out.push_back(value);
    }
    return out;
}

json globals_json(const Globals& g) {
    return {{"out_dir", g.out_dir}, {"format", g.format}, {"seed", g.seed}};
}

fock::HamiltonianKind make_kind(const std::string& kind, double lambda) {
    if (kind == "harmonic") return fock::HamiltonianKind::harmonic();
    if (kind == "free") return fock::HamiltonianKind::free_particle();
    if (kind == "quartic") {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("quartic coupling must be nonnegative");
        return fock::HamiltonianKind::quartic(lambda);
    }
    throw ValidationError("unknown Hamiltonian kind '" + kind + "'");
}

contraction::NPolicy make_policy(std::size_t n_min, double factor, std::size_t max_numeric) {
    if (n_min < 2) throw ValidationError("n-min must be at least 2");
    if (!(factor > 0.0)) throw ValidationError("n-factor must be positive");
    return {n_min, factor, max_numeric};
}

void check_positive(double v, const std::string& what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(what + " must be positive and finite");
}

// ---------------------------------------------------------------- algebra verify

struct AlgebraOptions {
    std::string k = "1,10,100,1000";
    std::string table;
    double tolerance = algebra::kExactTolerance;
};

RunOutput algebra_verify(const AlgebraOptions& o) {
    const auto ks = parse_list(o.k);
    if (ks.empty()) throw ValidationError("--k needs at least one value");
    check_positive(o.tolerance, "tolerance");

    struct Checked {
        std::string name;
        algebra::StructureTable table;
    };
    std::vector<Checked> tables{{"galilei", algebra::galilei_spatial_table()},
                                {"galilei_time", algebra::galilei_spatial_table(true)},
                                {"heisenberg_rotation", algebra::heisenberg_rotation_table()},
                                {"heisenberg_rotation_time", algebra::heisenberg_rotation_table(true)}};
    for (double k : ks) {
        const auto params = algebra::ContractionParams::heisenberg(k);
        tables.push_back({"heisenberg_rotation_k" + format_double(k),
                          algebra::contract(algebra::heisenberg_rotation_table(), params)});
    }
    std::set<std::string> scaled;
    for (const char* n : {"X1", "X2", "X3", "P1", "P2", "P3"}) scaled.insert(n);
    const auto limit = algebra::contraction_limit(algebra::heisenberg_rotation_table(), scaled);
    tables.push_back({"heisenberg_rotation_limit", limit});
    if (!o.table.empty()) {
        std::ifstream in(o.table);
        if (!in) throw ValidationError("cannot open table file '" + o.table + "'");
        tables.push_back({"input", algebra::read_table(in)});
    }

    RunOutput run;
    run.name = "algebra_verify";
    run.config = {{"command", "algebra verify"}, {"k", ks}, {"table", o.table}, {"tolerance", o.tolerance}};
    json table_results = json::array();
    std::vector<std::tuple<std::string, std::size_t, double, double>> rows;
    for (const auto& [name, tbl] : tables) {
        const double anti = algebra::antisymmetry_defect(tbl);
        const double jac = algebra::jacobi_defect(tbl);
        const bool ok = jac <= o.tolerance && anti <= o.tolerance;
        table_results.push_back(
            {{"table", name}, {"dim", tbl.dim()}, {"jacobi_defect", jac}, {"antisymmetry_defect", anti}, {"pass", ok}});
        rows.emplace_back(name, tbl.dim(), jac, anti);
        if (!ok && run.pass) {
            run.pass = false;
            run.failure = "Jacobi identity violated in table '" + name + "': residual " + format_double(jac);
        }
    }

    // In the limit X and P commute and I drops out of every bracket.
    double xp = 0.0, i_coupling = 0.0;
    const std::size_t i_index = limit.id("I").index;
    for (std::size_t a = 0; a < limit.dim(); ++a)
        for (std::size_t b = 0; b < limit.dim(); ++b) {
            i_coupling = std::max(i_coupling, std::abs(limit.coefficient(a, b, i_index)));
            const bool is_xp = limit.names()[a][0] == 'X' && limit.names()[b][0] == 'P';
            if (is_xp)
                for (std::size_t e = 0; e < limit.dim(); ++e) xp = std::max(xp, std::abs(limit.coefficient(a, b, e)));
        }
    const bool central = algebra::is_central(limit, i_index, o.tolerance);
    if ((xp != 0.0 || i_coupling != 0.0 || !central) && run.pass) {
        run.pass = false;
        run.failure = "contraction limit keeps a nonzero [X,P] bracket or couples I";
    }
    run.results = {{"tables", table_results},
                   {"limit", {{"max_xp_bracket", xp}, {"max_i_coefficient", i_coupling}, {"i_central", central}}}};

    run.csv.push_back({"algebra_verify.csv", [rows](std::ostream& out) {
                           CsvWriter csv(out);
                           csv.header({"table", "dim", "jacobi_defect", "antisymmetry_defect"});
                           for (const auto& [name, dim, jac, anti] : rows)
                               out << name << ',' << dim << ',' << format_double(jac) << ',' << format_double(anti)
                                   << '\n';
                       }});
    run.csv.push_back({"algebra_brackets.csv", [tables](std::ostream& out) {
                           CsvWriter csv(out);
                           csv.header({"table", "a", "b", "result", "re", "im"});
                           for (const auto& [name, tbl] : tables)
                               for (std::size_t a = 0; a < tbl.dim(); ++a)
                                   for (std::size_t b = a + 1; b < tbl.dim(); ++b)
                                       for (std::size_t e = 0; e < tbl.dim(); ++e) {
                                           const auto c = tbl.coefficient(a, b, e);
                                           if (c == algebra::Coefficient(0.0)) continue;
                                           out << name << ',' << tbl.names()[a] << ',' << tbl.names()[b] << ','
                                               << tbl.names()[e] << ',' << format_double(c.real()) << ','
                                               << format_double(c.imag()) << '\n';
                                       }
                       }});
    return run;
}

// ---------------------------------------------------------------- coset orbit

struct OrbitOptions {
    std::string coset = "spacetime";
    std::string mode = "flow";
    std::size_t steps = 10;
    double ds = 0.1;
    double b = 0.0;
    std::string v = "0,0,0", omega = "0,0,0", a = "0,0,0", pbar = "0,0,0", xbar = "0,0,0";
    double thetabar = 0.0;
    double t0 = 0.0;
    std::string x0 = "0,0,0", p0 = "0,0,0";
    double theta0 = 0.0;
};

RunOutput coset_orbit(const OrbitOptions& o) {
    check_positive(o.ds, "ds");
    const coset::Vec3 v = parse_vec3(o.v, "--v"), omega = parse_vec3(o.omega, "--omega"),
                      a = parse_vec3(o.a, "--a"), pbar = parse_vec3(o.pbar, "--pbar"),
                      xbar = parse_vec3(o.xbar, "--xbar"), x0 = parse_vec3(o.x0, "--x0"),
                      p0 = parse_vec3(o.p0, "--p0");
    std::vector<coset::CosetPoint> points;
    double ds = o.ds;
    if (o.mode == "finite") {
        if (o.coset != "spacetime") throw ValidationError("finite orbits are defined on the spacetime coset only");
        coset::GalileiElement g;
        g.B = o.b;
        g.V = v;
        g.R = coset::rotation(omega);
        g.A = a;
        points = coset::orbit(g, coset::SpaceTime{o.t0, x0}, o.steps);
        ds = 1.0;
    } else {
        coset::InfinitesimalElement e;
        e.b = o.b;
        e.v = v;
        e.omega = coset::rotation_generator(omega);
        e.a = a;
        e.pbar = pbar;
        e.xbar = xbar;
        e.thetabar = o.thetabar;
        coset::CosetPoint start;
        if (o.coset == "spacetime")
            start = coset::SpaceTime{o.t0, x0};
        else if (o.coset == "config")
            start = coset::Config{x0, o.theta0};
        else
            start = coset::Phase{p0, x0, o.theta0};
        points = coset::orbit(e, start, o.steps, o.ds);
    }

    RunOutput run;
    run.name = "coset_orbit";
    run.config = {{"command", "coset orbit"}, {"coset", o.coset}, {"mode", o.mode},   {"steps", o.steps},
                  {"ds", o.ds},               {"b", o.b},         {"v", vec_json(v)}, {"omega", vec_json(omega)},
                  {"a", vec_json(a)},         {"pbar", vec_json(pbar)},               {"xbar", vec_json(xbar)},
                  {"thetabar", o.thetabar},   {"t0", o.t0},       {"x0", vec_json(x0)}, {"p0", vec_json(p0)},
                  {"theta0", o.theta0}};
    const auto& last = points.back();
    json final_point = std::visit(
        [](const auto& pt) -> json {
            using T = std::decay_t<decltype(pt)>;
            if constexpr (std::is_same_v<T, coset::SpaceTime>) return {{"t", pt.t}, {"x", vec_json(pt.x)}};
            else if constexpr (std::is_same_v<T, coset::Config>)
                return {{"x", vec_json(pt.x)}, {"theta", pt.theta}};
            else
                return {{"p", vec_json(pt.p)}, {"x", vec_json(pt.x)}, {"theta", pt.theta}};
        },
        last);
    run.results = {{"n_points", points.size()}, {"final", final_point}};
    run.csv.push_back({"coset_orbit.csv", [points, ds](std::ostream& out) { coset::write_orbit_csv(out, points, ds); }});
    return run;
}

// ---------------------------------------------------------------- coherent overlap

struct OverlapOptions {
    std::size_t n = 128;
    double hbar = 1.0;
    double label_min = -2.0;
    double label_max = 2.0;
    std::size_t label_count = 9;
    double tolerance = 1e-8;
    double self_tolerance = 1e-10;
};

RunOutput coherent_overlap(const OverlapOptions& o) {
    check_positive(o.hbar, "hbar");
    check_positive(o.tolerance, "tolerance");
    check_positive(o.self_tolerance, "self-tolerance");
    if (o.n < 2) throw ValidationError("--n must be at least 2");
    if (o.label_count < 1) throw ValidationError("--label-count must be at least 1");
    if (!(o.label_max >= o.label_min)) throw ValidationError("--label-max must not be below --label-min");

    std::vector<coherent::CoherentLabel> labels;
    const double step = o.label_count > 1 ? (o.label_max - o.label_min) / double(o.label_count - 1) : 0.0;
    for (std::size_t i = 0; i < o.label_count; ++i)
        for (std::size_t j = 0; j < o.label_count; ++j)
            labels.push_back(coherent::CoherentLabel::axis(o.label_min + double(i) * step, o.label_min + double(j) * step));

    const fock::Quadratures q = fock::build_xp(o.n, o.hbar);
    std::vector<fock::ComplexVector> states, x_states, p_states;
    for (const auto& l : labels) {
        const auto psi = coherent::coherent_state(contraction::unrelabel(l, o.hbar), o.n);
        states.push_back(psi.amplitudes());
        x_states.push_back(q.x.matrix() * psi.amplitudes());
        p_states.push_back(q.p.matrix() * psi.amplitudes());
    }

    struct Row {
        double p1, x1, p2, x2;
        fock::Complex analytic, numeric;
        double mx_diff, mp_diff;
    };
    std::vector<Row> rows;
    double max_ov = 0.0, max_self = 0.0, max_mx = 0.0, max_mp = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = 0; j < labels.size(); ++j) {
            const auto analytic = coherent::overlap_analytic(labels[i], labels[j], o.hbar);
            const auto numeric = states[i].dot(states[j]);
            const auto m = coherent::matrix_element_xp(labels[i], labels[j], o.hbar);
            const double mx_diff = std::abs(states[i].dot(x_states[j]) - m.mx);
            const double mp_diff = std::abs(states[i].dot(p_states[j]) - m.mp);
            max_ov = std::max(max_ov, std::abs(numeric - analytic));
            if (i == j) max_self = std::max(max_self, std::abs(numeric - 1.0));
            max_mx = std::max(max_mx, mx_diff);
            max_mp = std::max(max_mp, mp_diff);
            rows.push_back({labels[i].p[0], labels[i].x[0], labels[j].p[0], labels[j].x[0], analytic, numeric, mx_diff,
                            mp_diff});
        }

    RunOutput run;
    run.name = "coherent_overlap";
    run.config = {{"command", "coherent overlap"}, {"n", o.n},
                  {"hbar", o.hbar},                {"label_min", o.label_min},
                  {"label_max", o.label_max},      {"label_count", o.label_count},
                  {"tolerance", o.tolerance},      {"self_tolerance", o.self_tolerance}};
    run.results = {{"n_labels", labels.size()},       {"max_overlap_difference", max_ov},
                   {"max_self_overlap_error", max_self}, {"max_x_element_difference", max_mx},
                   {"max_p_element_difference", max_mp}};
    if (max_ov > o.tolerance || max_mx > o.tolerance || max_mp > o.tolerance) {
        run.pass = false;
        run.failure = "numeric and closed-form overlaps or matrix elements differ beyond " + format_double(o.tolerance);
    } else if (max_self > o.self_tolerance) {
        run.pass = false;
        run.failure = "self-overlap deviates from 1 by " + format_double(max_self);
    }
    run.rows = json::array();
    for (const auto& r : rows)
        run.rows.push_back({r.p1, r.x1, r.p2, r.x2, r.analytic.real(), r.analytic.imag(), r.numeric.real(),
                            r.numeric.imag(), r.mx_diff, r.mp_diff});
    run.csv.push_back({"coherent_overlap.csv", [rows](std::ostream& out) {
                           CsvWriter csv(out);
                           csv.header({"p1", "x1", "p2", "x2", "re", "im", "abs", "re_numeric", "im_numeric",
                                       "x_element_diff", "p_element_diff"});
                           for (const auto& r : rows)
                               csv.row({r.p1, r.x1, r.p2, r.x2, r.analytic.real(), r.analytic.imag(),
                                        std::abs(r.analytic), r.numeric.real(), r.numeric.imag(), r.mx_diff,
                                        r.mp_diff});
                       }});
    return run;
}

// ---------------------------------------------------------------- evolve

struct EvolveOptions {
    std::string kind = "harmonic";
    double lambda = 0.1;
    std::size_t n = 32;
    double hbar = 1.0;
    double t_final = 10.0;
    double dt = 1e-3;
    std::string method = "rk4";
    double x0 = 1.0;
    double p0 = 0.0;
    std::string hamiltonian_file;
    std::size_t sample_every = 100;
    double tolerance = 1e-6;
    double conservation_tolerance = 1e-8;
};

RunOutput evolve(const EvolveOptions& o, std::uint64_t seed) {
    check_positive(o.hbar, "hbar");
    check_positive(o.tolerance, "tolerance");
    check_positive(o.conservation_tolerance, "conservation-tolerance");
    std::optional<fock::FockOperator> h;
    if (!o.hamiltonian_file.empty()) {
        std::ifstream in(o.hamiltonian_file);
        if (!in) throw ValidationError("cannot open Hamiltonian file '" + o.hamiltonian_file + "'");
        h = fock::read_operator_csv(in, o.hbar, "custom");
    } else {
        h = fock::build_hamiltonian(make_kind(o.kind, o.lambda), o.n, o.hbar);
    }
    const std::size_t n = h->n_levels();
    projective::EvolutionSpec spec{*h, o.t_final, o.dt,
                                   o.method == "leapfrog" ? projective::Integrator::symplectic_leapfrog
                                                          : projective::Integrator::rk4,
                                   o.sample_every};
    projective::validate(spec);
    const auto psi0 = coherent::coherent_state(coherent::CoherentLabel::axis(o.p0, o.x0), n);
    const auto report = projective::equivalence_report(psi0, spec);
    const fock::Quadratures q = fock::build_xp(n, o.hbar);
    const auto inv = projective::ray_invariants(psi0, q.x, q.p, *h, seed);

    struct Row {
        double t, xs, ps, xh, ph, norm, energy, deviation;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < report.schrodinger.size(); ++i) {
        const auto& s = report.schrodinger[i];
        const auto& c = report.hamilton[i];
        const auto from_h = projective::from_coordinates(c.coords);
        const auto direct = projective::to_coordinates(s.state, o.hbar);
        const double dev = std::sqrt((direct.q - c.coords.q).squaredNorm() + (direct.p - c.coords.p).squaredNorm());
        rows.push_back({s.t, fock::expectation(q.x, s.state).real(), fock::expectation(q.p, s.state).real(),
                        fock::expectation(q.x, from_h).real(), fock::expectation(q.p, from_h).real(), s.state.norm(),
                        projective::hamiltonian_function(c.coords, *h), dev});
    }

    RunOutput run;
    run.name = "evolve";
    run.config = {{"command", "evolve"},        {"kind", o.hamiltonian_file.empty() ? o.kind : "file"},
                  {"lambda", o.lambda},         {"n", n},
                  {"hbar", o.hbar},             {"t_final", o.t_final},
                  {"dt", o.dt},                 {"method", o.method},
                  {"x0", o.x0},                 {"p0", o.p0},
                  {"hamiltonian_file", o.hamiltonian_file}, {"sample_every", o.sample_every},
                  {"tolerance", o.tolerance},   {"conservation_tolerance", o.conservation_tolerance}};
    run.results = {{"max_deviation", report.max_deviation},
                   {"norm_drift", report.norm_drift},
                   {"energy_drift", report.energy_drift},
                   {"n_samples", rows.size()},
                   {"ray_invariants",
                    {{"x", inv.x}, {"p", inv.p}, {"h", inv.h}, {"phase_sensitivity", inv.phase_sensitivity}}}};
    if (report.max_deviation > o.tolerance) {
        run.pass = false;
        run.failure = "Schrodinger and Hamilton trajectories differ by " + format_double(report.max_deviation);
    } else if (spec.method == projective::Integrator::rk4 &&
               (report.norm_drift > o.conservation_tolerance || report.energy_drift > o.conservation_tolerance)) {
        // The leapfrog's energy error oscillates at O(dt^2); drift is only enforced for RK4.
        run.pass = false;
        run.failure = "norm or energy drift exceeds " + format_double(o.conservation_tolerance);
    }
    run.rows = json::array();
    for (const auto& r : rows) run.rows.push_back({r.t, r.xs, r.ps, r.xh, r.ph, r.norm, r.energy, r.deviation});
    run.csv.push_back({"evolve.csv", [rows](std::ostream& out) {
                           CsvWriter csv(out);
                           csv.header({"t", "x_schrodinger", "p_schrodinger", "x_hamilton", "p_hamilton", "norm",
                                       "energy", "deviation"});
                           for (const auto& r : rows) csv.row({r.t, r.xs, r.ps, r.xh, r.ph, r.norm, r.energy, r.deviation});
                       }});
    return run;
}

// ---------------------------------------------------------------- contract sweep

struct SweepOptions {
    std::string hbar_grid = "1,0.5,0.2,0.1,0.05,0.02,0.01";
    std::string pairs = "default";
    std::size_t n_min = 64;
    double n_factor = 9.0;
    std::size_t n_max_numeric = 256;
    double tolerance = 1e-3;
    double numeric_tolerance = 1e-8;
    std::string position_hbar_grid = "1,0.1,0.01,0.001,0.0001";
    std::size_t position_points = 4096;
    double position_spacing = 0.0025;
    std::string position_centers = "-0.5,0.5";
};

// `default`, `same`, or `p1,x1,p2,x2;...` in relabeled units.
std::vector<contraction::LabelPair> parse_pairs(const std::string& text) {
    using coherent::CoherentLabel;
    if (text == "default") return {{CoherentLabel::axis(0.0, 0.0), CoherentLabel::axis(0.0, 1.0)}};
    if (text == "same") return {{CoherentLabel::axis(0.0, 0.0), CoherentLabel::axis(0.0, 0.0)}};
    std::vector<contraction::LabelPair> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (trim(item).empty()) continue;
        const auto v = parse_list(item);
        if (v.size() != 4) throw ValidationError("a label pair is p1,x1,p2,x2; got '" + trim(item) + "'");
        out.push_back({CoherentLabel::axis(v[0], v[1]), CoherentLabel::axis(v[2], v[3])});
    }
    if (out.empty()) throw ValidationError("no label pairs given");
    return out;
}

RunOutput contract_sweep(const SweepOptions& o) {
    check_positive(o.tolerance, "tolerance");
    check_positive(o.numeric_tolerance, "numeric-tolerance");
    contraction::SweepSpec spec{parse_list(o.hbar_grid), parse_pairs(o.pairs),
                                make_policy(o.n_min, o.n_factor, o.n_max_numeric)};
    const auto reports = contraction::overlap_decay_sweep(spec);
    contraction::PositionGridSpec grid{o.position_points, o.position_spacing, parse_list(o.position_centers)};
    const auto position = contraction::position_basis_contraction(grid, parse_list(o.position_hbar_grid));

    RunOutput run;
    run.name = "contract_sweep";
    run.config = {{"command", "contract sweep"},
                  {"hbar_grid", spec.hbar_grid},
                  {"pairs", o.pairs},
                  {"n_min", o.n_min},
                  {"n_factor", o.n_factor},
                  {"n_max_numeric", o.n_max_numeric},
                  {"tolerance", o.tolerance},
                  {"numeric_tolerance", o.numeric_tolerance},
                  {"position_hbar_grid", parse_list(o.position_hbar_grid)},
                  {"position_points", o.position_points},
                  {"position_spacing", o.position_spacing},
                  {"position_centers", grid.centers}};
    json pairs = json::array();
    run.rows = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        bool monotone = true;
        for (std::size_t j = 1; j < r.rows.size(); ++j) monotone = monotone && r.rows[j].abs_overlap < r.rows[j - 1].abs_overlap;
        const double rel = r.relative_error();
        const double numeric = r.max_numeric_difference();
        pairs.push_back({{"l1", {r.labels.first.p[0], r.labels.first.x[0]}},
                         {"l2", {r.labels.second.p[0], r.labels.second.x[0]}},
                         {"fitted_slope", r.fitted_slope},
                         {"slope_stderr", r.slope_stderr},
                         {"expected_slope", r.expected_slope},
                         {"relative_error", rel},
                         {"max_numeric_difference", numeric},
                         {"overlap_strictly_decreasing", monotone}});
        if (run.pass && rel > o.tolerance) {
            run.pass = false;
            run.failure = "fitted slope off by relative " + format_double(rel) + " for pair " + std::to_string(i);
        } else if (run.pass && numeric > o.numeric_tolerance) {
            run.pass = false;
            run.failure = "analytic and numeric overlaps differ by " + format_double(numeric);
        }
        for (const auto& row : r.rows)
            run.rows.push_back({i, row.hbar, row.abs_overlap, row.offdiag_x, row.offdiag_p,
                                row.abs_overlap_numeric.value_or(std::numeric_limits<double>::quiet_NaN())});
        const std::string file = reports.size() == 1 ? "contract_sweep.csv" : "contract_sweep_pair" + std::to_string(i) + ".csv";
        run.csv.push_back({file, [r](std::ostream& out) { contraction::write_decay_csv(out, r); }});
    }
    json prow = json::array();
    for (const auto& r : position.rows)
        prow.push_back({{"hbar", r.hbar},
                        {"max_offdiag_overlap", r.max_offdiag_overlap},
                        {"underflow", r.underflow},
                        {"log10_analytic_overlap", r.log10_analytic_overlap},
                        {"max_offdiag_x", r.max_offdiag_x},
                        {"max_diag_error", r.max_diag_error}});
    run.results = {{"pairs", pairs},
                   {"position_basis", {{"resolution_warning", position.resolution_warning}, {"rows", prow}}}};
    run.csv.push_back({"contract_position.csv", [position](std::ostream& out) {
                           CsvWriter csv(out);
                           csv.header({"hbar", "max_offdiag_overlap", "underflow", "log10_analytic_overlap",
                                       "max_offdiag_x", "max_diag_error"});
                           for (const auto& r : position.rows)
                               csv.row({r.hbar, r.max_offdiag_overlap, r.underflow ? 1.0 : 0.0,
                                        r.log10_analytic_overlap, r.max_offdiag_x, r.max_diag_error});
                       }});
    return run;
}

// ---------------------------------------------------------------- contract classical

struct ClassicalOptions {
    double x0 = 0.5;
    double p0 = 0.0;
    std::string hbar_grid = "1,0.1,0.01,0.001";
    std::string kind = "harmonic";
    double lambda = 0.1;
    double t_final = 5.0;
    double dt = 1e-2;
    std::size_t n_min = 64;
    double n_factor = 9.0;
    double tolerance = 1e-6;
    double min_ratio = 10.0;
};

RunOutput contract_classical(const ClassicalOptions& o) {
    check_positive(o.tolerance, "tolerance");
    check_positive(o.min_ratio, "min-ratio");
    if (o.kind == "free") throw ValidationError("classical comparison supports harmonic and quartic only");
    contraction::EmergenceSpec spec;
    spec.x0 = o.x0;
    spec.p0 = o.p0;
    spec.hbar_grid = parse_list(o.hbar_grid);
    spec.kind = make_kind(o.kind, o.lambda);
    spec.t_final = o.t_final;
    spec.dt = o.dt;
    spec.n_policy = make_policy(o.n_min, o.n_factor, 0);
    const auto rows = contraction::classical_trajectory_emergence(spec);

    RunOutput run;
    run.name = "contract_classical";
    run.config = {{"command", "contract classical"}, {"x0", o.x0}, {"p0", o.p0}, {"hbar_grid", spec.hbar_grid},
                  {"kind", o.kind}, {"lambda", o.lambda}, {"t_final", o.t_final}, {"dt", o.dt}, {"n_min", o.n_min},
                  {"n_factor", o.n_factor}, {"tolerance", o.tolerance}, {"min_ratio", o.min_ratio}};
    json table = json::array();
    bool nonincreasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        table.push_back({{"hbar", rows[i].hbar}, {"max_traj_dev", rows[i].max_deviation}, {"n_levels", rows[i].n_levels}});
        if (i > 0) nonincreasing = nonincreasing && rows[i].max_deviation <= rows[i - 1].max_deviation;
    }
    const double ratio = rows.back().max_deviation > 0.0 ? rows.front().max_deviation / rows.back().max_deviation
                                                         : std::numeric_limits<double>::infinity();
    run.results = {{"rows", table}, {"nonincreasing", nonincreasing}, {"first_to_last_ratio", ratio}};
    if (spec.kind.type == fock::HamiltonianKind::Type::harmonic) {
        for (const auto& r : rows)
            if (r.max_deviation > o.tolerance && run.pass) {
                run.pass = false;
                run.failure = "harmonic trajectory deviates by " + format_double(r.max_deviation) + " at hbar " +
                              format_double(r.hbar);
            }
    } else if (o.t_final > 0.0 && rows.size() > 1 && (!nonincreasing || ratio < o.min_ratio)) {
        run.pass = false;
        run.failure = "quartic deviation does not shrink by " + format_double(o.min_ratio) + "x along the grid";
    }
    run.csv.push_back({"contract_classical.csv", [rows](std::ostream& out) { contraction::write_deviation_csv(out, rows); }});
    return run;
}

// ---------------------------------------------------------------- output

int emit(const Globals& g, RunOutput run, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    json config = run.config;
    config["global"] = globals_json(g);
    std::error_code ec;
    fs::create_directories(g.out_dir, ec);
    if (ec) throw ValidationError("cannot create output directory '" + g.out_dir + "': " + ec.message());
    const fs::path dir(g.out_dir);
    if (g.format == "csv") {
        for (const auto& c : run.csv) {
            std::ofstream f(dir / c.file, std::ios::binary);
            if (!f) throw ValidationError("cannot write '" + (dir / c.file).string() + "'");
            CsvWriter csv(f);
            csv.comment(std::string("qspace ") + kVersion);
            csv.comment("config " + config.dump());
            c.write(f);
        }
    }
    json summary = {{"version", kVersion}, {"config", config}, {"results", run.results}, {"pass", run.pass}};
    if (g.format == "json") summary["rows"] = run.rows;
    {
        std::ofstream f(dir / (run.name + ".json"), std::ios::binary);
        if (!f) throw ValidationError("cannot write summary in '" + g.out_dir + "'");
        f << summary.dump(2) << '\n';
    }
    out << run.name << ": " << (run.pass ? "PASS" : "FAIL") << " (" << (dir / (run.name + ".json")).string() << ")\n";
    if (!run.pass) {
        err << "tolerance failure: " << run.failure << '\n';
        return kToleranceFailure;
    }
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    try {
        args = inject_config(raw_args);
    } catch (const std::exception& e) {
        err << "error: config: " << e.what() << '\n';
        return kInputError;
    }

    CLI::App app{"Contraction experiments on the quantum Galilei phase space"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    auto* out_dir_opt = app.add_option("--out-dir", g.out_dir, "Output directory (env " + std::string(kOutDirEnv) + ")");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", g.seed, "Seed for randomized checks");
    app.add_option("--config", g.config, "key = value file; command-line flags take precedence");

    std::function<RunOutput()> action;

    auto* algebra_cmd = app.add_subcommand("algebra", "Structure-constant tables")->require_subcommand(1);
    AlgebraOptions ao;
    auto* verify = algebra_cmd->add_subcommand("verify", "Jacobi residuals and contraction tables");
    verify->add_option("--k", ao.k, "Contraction parameters, comma separated");
    verify->add_option("--table", ao.table, "Extra table file to verify");
    verify->add_option("--tolerance", ao.tolerance);
    verify->callback([&] { action = [&] { return algebra_verify(ao); }; });

    auto* coset_cmd = app.add_subcommand("coset", "Coset actions")->require_subcommand(1);
    OrbitOptions oo;
    auto* orbit = coset_cmd->add_subcommand("orbit", "Orbit of a point");
    orbit->add_option("--coset", oo.coset)->check(CLI::IsMember({"spacetime", "config", "phase"}));
    orbit->add_option("--mode", oo.mode, "flow (infinitesimal element) or finite (group element)")
        ->check(CLI::IsMember({"flow", "finite"}));
    orbit->add_option("--steps", oo.steps);
    orbit->add_option("--ds", oo.ds);
    orbit->add_option("--b", oo.b, "Time translation");
    orbit->add_option("--v", oo.v, "Boost velocity");
    orbit->add_option("--omega", oo.omega, "Rotation axis (flow) or axis-angle (finite)");
    orbit->add_option("--a", oo.a, "Space translation");
    orbit->add_option("--pbar", oo.pbar);
    orbit->add_option("--xbar", oo.xbar);
    orbit->add_option("--thetabar", oo.thetabar);
    orbit->add_option("--t0", oo.t0);
    orbit->add_option("--x0", oo.x0);
    orbit->add_option("--p0", oo.p0);
    orbit->add_option("--theta0", oo.theta0);
    orbit->callback([&] { action = [&] { return coset_orbit(oo); }; });

    auto* coherent_cmd = app.add_subcommand("coherent", "Coherent states")->require_subcommand(1);
    OverlapOptions ov;
    auto* overlap = coherent_cmd->add_subcommand("overlap", "Numeric vs closed-form overlaps and matrix elements");
    overlap->add_option("--n", ov.n, "Fock levels");
    overlap->add_option("--hbar", ov.hbar);
    overlap->add_option("--label-min", ov.label_min);
    overlap->add_option("--label-max", ov.label_max);
    overlap->add_option("--label-count", ov.label_count, "Grid points per axis");
    overlap->add_option("--tolerance", ov.tolerance);
    overlap->add_option("--self-tolerance", ov.self_tolerance);
    overlap->callback([&] { action = [&] { return coherent_overlap(ov); }; });

    EvolveOptions eo;
    auto* evolve_cmd = app.add_subcommand("evolve", "Schrodinger vs Hamilton evolution");
    evolve_cmd->add_option("--kind", eo.kind)->check(CLI::IsMember({"harmonic", "free", "quartic"}));
    evolve_cmd->add_option("--lambda", eo.lambda, "Quartic coupling");
    evolve_cmd->add_option("--n", eo.n, "Fock levels");
    evolve_cmd->add_option("--hbar", eo.hbar);
    evolve_cmd->add_option("--t-final", eo.t_final);
    evolve_cmd->add_option("--dt", eo.dt);
    evolve_cmd->add_option("--method", eo.method)->check(CLI::IsMember({"rk4", "leapfrog"}));
    evolve_cmd->add_option("--x0", eo.x0, "Initial coherent label");
    evolve_cmd->add_option("--p0", eo.p0);
    evolve_cmd->add_option("--hamiltonian-file", eo.hamiltonian_file, "CSV row,col,re,im");
    evolve_cmd->add_option("--sample-every", eo.sample_every);
    evolve_cmd->add_option("--tolerance", eo.tolerance);
    evolve_cmd->add_option("--conservation-tolerance", eo.conservation_tolerance);
    evolve_cmd->callback([&] { action = [&] { return evolve(eo, g.seed); }; });

    auto* contract_cmd = app.add_subcommand("contract", "hbar -> 0 experiments")->require_subcommand(1);
    SweepOptions so;
    auto* sweep = contract_cmd->add_subcommand("sweep", "Overlap decay and diagonalization");
    sweep->add_option("--hbar-grid", so.hbar_grid);
    sweep->add_option("--pairs", so.pairs, "default, same, or p1,x1,p2,x2;...");
    sweep->add_option("--n-min", so.n_min);
    sweep->add_option("--n-factor", so.n_factor);
    sweep->add_option("--n-max-numeric", so.n_max_numeric);
    sweep->add_option("--tolerance", so.tolerance, "Relative slope tolerance");
    sweep->add_option("--numeric-tolerance", so.numeric_tolerance);
    sweep->add_option("--position-hbar-grid", so.position_hbar_grid);
    sweep->add_option("--position-points", so.position_points);
    sweep->add_option("--position-spacing", so.position_spacing);
    sweep->add_option("--position-centers", so.position_centers);
    sweep->callback([&] { action = [&] { return contract_sweep(so); }; });

    ClassicalOptions co;
    auto* classical = contract_cmd->add_subcommand("classical", "Coherent-centre vs classical trajectories");
    classical->add_option("--x0", co.x0);
    classical->add_option("--p0", co.p0);
    classical->add_option("--hbar-grid", co.hbar_grid);
    classical->add_option("--kind", co.kind)->check(CLI::IsMember({"harmonic", "quartic", "free"}));
    classical->add_option("--lambda", co.lambda);
    classical->add_option("--t-final", co.t_final);
    classical->add_option("--dt", co.dt);
    classical->add_option("--n-min", co.n_min);
    classical->add_option("--n-factor", co.n_factor);
    classical->add_option("--tolerance", co.tolerance, "Harmonic deviation bound");
    classical->add_option("--min-ratio", co.min_ratio, "Required quartic shrink factor");
    classical->callback([&] { action = [&] { return contract_classical(co); }; });

    std::vector<const char*> argv{"qspace"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kSuccess;
        }
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    if (out_dir_opt->count() == 0)
        if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') g.out_dir = env;

    try {
        return emit(g, action(), out, err);
    } catch (const ParseError& e) {
        err << "error: parse: " << e.what() << '\n';
    } catch (const PrecisionError& e) {
        err << "error: precision: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return kInputError;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace qspace::cli
