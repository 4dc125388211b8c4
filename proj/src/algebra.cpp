#include "qspace/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "qspace/errors.hpp"

namespace qspace::algebra {

namespace {

int levi_civita(int i, int j, int k) {
    if (i == j || j == k || i == k) return 0;
    // even permutations of (0,1,2)
    if ((i == 0 && j == 1) || (i == 1 && j == 2) || (i == 2 && j == 0)) return 1;
    return -1;
}

std::string axis_name(const char* prefix, int i) { return std::string(prefix) + std::to_string(i + 1); }

std::vector<std::string> spatial_names(bool with_time) {
    std::vector<std::string> names;
    for (const char* family : {"J", "X", "P"})
        for (int i = 0; i < 3; ++i) names.push_back(axis_name(family, i));
    if (with_time) names.push_back("T");
    return names;
}

void add_rotation_brackets(TableBuilder& b) {
    for (const char* family : {"J", "X", "P"}) {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                for (int k = 0; k < 3; ++k) {
                    const int eps = levi_civita(i, j, k);
                    if (eps == 0) continue;
                    b.bracket(axis_name("J", i), axis_name(family, j), {{axis_name(family, k), double(eps)}});
                }
            }
        }
    }
}

void add_time_brackets(TableBuilder& b) {
    for (int i = 0; i < 3; ++i)
        b.bracket(axis_name("X", i), "T", {{axis_name("P", i), Coefficient(0.0, 1.0)}});
}

double power_of(double k, int n) {
    if (n == 0) return 1.0;
    if (n < 0) return 1.0 / std::pow(k, -n);
    return std::pow(k, n);
}

}  // namespace

GeneratorId StructureTable::id(std::string_view name) const {
    if (auto g = find(name)) return *g;
    throw ValidationError("unknown generator '" + std::string(name) + "'");
}

GeneratorId StructureTable::id(std::size_t index) const {
    if (index >= dim()) throw ValidationError("generator index " + std::to_string(index) + " out of range");
    return {names_[index], index};
}

std::optional<GeneratorId> StructureTable::find(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return GeneratorId{std::string(name), std::size_t(it - names_.begin())};
}

void StructureTable::check(const GeneratorId& g) const {
    if (g.index >= dim() || names_[g.index] != g.name)
        throw ValidationError("generator '" + g.name + "' (index " + std::to_string(g.index) +
                              ") is not part of this table");
}

TableBuilder::TableBuilder(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw ValidationError("a structure table needs at least one generator");
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
        if (n.empty()) throw ValidationError("empty generator name");
        if (!seen.insert(n).second) throw ValidationError("duplicate generator name '" + n + "'");
    }
    const std::size_t d = names_.size();
    coeffs_.assign(d * d * d, Coefficient{});
}

TableBuilder::TableBuilder(const StructureTable& base) : names_(base.names_), coeffs_(base.coeffs_) {}

std::size_t TableBuilder::index(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw ValidationError("unknown generator '" + std::string(name) + "'");
    return std::size_t(it - names_.begin());
}

TableBuilder& TableBuilder::bracket(std::string_view a, std::string_view b,
                                    const std::vector<std::pair<std::string, Coefficient>>& rhs) {
    const std::size_t ia = index(a), ib = index(b);
    if (ia == ib) throw ValidationError("[" + std::string(a) + "," + std::string(a) + "] must vanish");
    const std::size_t d = names_.size();
    for (std::size_t e = 0; e < d; ++e) {
        coeffs_[(ia * d + ib) * d + e] = 0.0;
        coeffs_[(ib * d + ia) * d + e] = 0.0;
    }
    for (const auto& [name, c] : rhs) {
        const std::size_t ie = index(name);
        coeffs_[(ia * d + ib) * d + ie] += c;
        coeffs_[(ib * d + ia) * d + ie] -= c;
    }
    return *this;
}

TableBuilder& TableBuilder::raw(std::size_t a, std::size_t b, std::size_t e, Coefficient c) {
    const std::size_t d = names_.size();
    if (a >= d || b >= d || e >= d) throw ValidationError("structure constant index out of range");
    coeffs_[(a * d + b) * d + e] = c;
    return *this;
}

StructureTable TableBuilder::build() const {
    for (const auto& c : coeffs_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw ValidationError("structure constants must be finite");
    return StructureTable(names_, coeffs_);
}

StructureTable galilei_spatial_table(bool with_time) {
    TableBuilder b(spatial_names(with_time));
    add_rotation_brackets(b);
    if (with_time) add_time_brackets(b);
    return b.build();
}

StructureTable heisenberg_rotation_table(bool with_time) {
    auto names = spatial_names(false);
    names.push_back("I");
    if (with_time) names.push_back("T");
    TableBuilder b(names);
    add_rotation_brackets(b);
    for (int i = 0; i < 3; ++i) b.bracket(axis_name("X", i), axis_name("P", i), {{"I", Coefficient(0.0, 1.0)}});
    if (with_time) add_time_brackets(b);
    return b.build();
}

StructureTable with_central_u1(const StructureTable& tbl, std::string name) {
    auto names = tbl.names();
    names.push_back(std::move(name));
    TableBuilder b(names);
    const std::size_t d = tbl.dim();
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t c = 0; c < d; ++c)
            for (std::size_t e = 0; e < d; ++e)
                if (auto v = tbl.coefficient(a, c, e); v != Coefficient{}) b.raw(a, c, e, v);
    return b.build();
}

LinearCombination bracket(const GeneratorId& a, const GeneratorId& b, const StructureTable& tbl) {
    tbl.check(a);
    tbl.check(b);
    LinearCombination out;
    for (std::size_t e = 0; e < tbl.dim(); ++e)
        if (auto c = tbl.coefficient(a.index, b.index, e); c != Coefficient{}) out.push_back({e, c});
    return out;
}

double antisymmetry_defect(const StructureTable& tbl) {
    const std::size_t d = tbl.dim();
    double worst = 0.0;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b)
            for (std::size_t e = 0; e < d; ++e)
                worst = std::max(worst, std::abs(tbl.coefficient(a, b, e) + tbl.coefficient(b, a, e)));
    return worst;
}

double jacobi_defect(const StructureTable& tbl) {
    if (double defect = antisymmetry_defect(tbl); defect > kExactTolerance)
        throw ValidationError("structure table is not antisymmetric (defect " + std::to_string(defect) + ")");
    const std::size_t d = tbl.dim();
    double worst = 0.0;
    std::vector<Coefficient> residual(d);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a + 1; b < d; ++b) {
            for (std::size_t c = b + 1; c < d; ++c) {
                std::fill(residual.begin(), residual.end(), Coefficient{});
                // [a,[b,c]] + [b,[c,a]] + [c,[a,b]]
                for (std::size_t m = 0; m < d; ++m) {
                    const Coefficient bc = tbl.coefficient(b, c, m);
                    const Coefficient ca = tbl.coefficient(c, a, m);
                    const Coefficient ab = tbl.coefficient(a, b, m);
                    if (bc == Coefficient{} && ca == Coefficient{} && ab == Coefficient{}) continue;
                    for (std::size_t e = 0; e < d; ++e)
                        residual[e] += bc * tbl.coefficient(a, m, e) + ca * tbl.coefficient(b, m, e) +
                                       ab * tbl.coefficient(c, m, e);
                }
                for (const auto& r : residual) worst = std::max(worst, std::abs(r));
            }
        }
    }
    return worst;
}

bool is_central(const StructureTable& tbl, std::size_t generator, double tol) {
    if (generator >= tbl.dim()) throw ValidationError("generator index out of range");
    for (std::size_t b = 0; b < tbl.dim(); ++b)
        for (std::size_t e = 0; e < tbl.dim(); ++e)
            if (std::abs(tbl.coefficient(generator, b, e)) > tol || std::abs(tbl.coefficient(b, generator, e)) > tol)
                return false;
    return true;
}

double max_difference(const StructureTable& lhs, const StructureTable& rhs) {
    if (lhs.names() != rhs.names()) throw ValidationError("tables have different generators");
    const std::size_t d = lhs.dim();
    double worst = 0.0;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            for (std::size_t e = 0; e < d; ++e)
                worst = std::max(worst, std::abs(lhs.coefficient(a, b, e) - rhs.coefficient(a, b, e)));
    return worst;
}

ContractionParams::ContractionParams(double k, std::set<std::string> scaled) : k_(k), scaled_(std::move(scaled)) {
    if (std::isnan(k) || k <= 0.0) throw ValidationError("contraction scale k must be positive");
    if (k < 1.0) throw ValidationError("contraction scale k must be at least 1");
    hbar_ = std::isinf(k) ? 0.0 : 1.0 / (k * k);
}

ContractionParams ContractionParams::heisenberg(double k) {
    return ContractionParams(k, {"X1", "X2", "X3", "P1", "P2", "P3"});
}

ContractionParams ContractionParams::limit(std::set<std::string> scaled) {
    return ContractionParams(std::numeric_limits<double>::infinity(), std::move(scaled));
}

bool ContractionParams::is_limit() const { return std::isinf(k_); }

int ContractionParams::scaling_power(const StructureTable& tbl, std::size_t a, std::size_t b, std::size_t e) const {
    auto weight = [&](std::size_t g) { return scaled_.count(tbl.names()[g]) ? 1 : 0; };
    // G^c = G/k for scaled generators: [G_a^c, G_b^c] = s_a s_b / s_e c_ab^e G_e^c.
    return weight(e) - weight(a) - weight(b);
}

namespace {

void check_scaled_exist(const StructureTable& tbl, const std::set<std::string>& scaled) {
    for (const auto& name : scaled)
        if (!tbl.find(name)) throw ValidationError("scaled generator '" + name + "' is not in the table");
}

StructureTable rescale(const StructureTable& tbl, const ContractionParams& params, int direction) {
    check_scaled_exist(tbl, params.scaled());
    const std::size_t d = tbl.dim();
    TableBuilder b(tbl.names());
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t c = 0; c < d; ++c)
            for (std::size_t e = 0; e < d; ++e) {
                const Coefficient v = tbl.coefficient(a, c, e);
                if (v == Coefficient{}) continue;
                b.raw(a, c, e, v * power_of(params.k(), direction * params.scaling_power(tbl, a, c, e)));
            }
    return b.build();
}

}  // namespace

StructureTable contract(const StructureTable& tbl, const ContractionParams& params) {
    if (params.is_limit()) return contraction_limit(tbl, params.scaled());
    return rescale(tbl, params, +1);
}

StructureTable uncontract(const StructureTable& tbl, const ContractionParams& params) {
    if (params.is_limit()) throw ValidationError("the contraction limit cannot be undone");
    return rescale(tbl, params, -1);
}

StructureTable contraction_limit(const StructureTable& tbl, const std::set<std::string>& scaled) {
    check_scaled_exist(tbl, scaled);
    const ContractionParams unit(1.0, scaled);
    const std::size_t d = tbl.dim();
    TableBuilder b(tbl.names());
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t c = 0; c < d; ++c)
            for (std::size_t e = 0; e < d; ++e) {
                const Coefficient v = tbl.coefficient(a, c, e);
                if (v == Coefficient{}) continue;
                const int n = unit.scaling_power(tbl, a, c, e);
                if (n > 0)
                    throw LimitError("[" + tbl.names()[a] + "," + tbl.names()[c] + "] component on " +
                                     tbl.names()[e] + " diverges as k^" + std::to_string(n));
                if (n == 0) b.raw(a, c, e, v);
            }
    return b.build();
}

}  // namespace qspace::algebra
