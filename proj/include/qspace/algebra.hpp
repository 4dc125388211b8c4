#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qspace::algebra {

using Coefficient = std::complex<double>;

// Absolute tolerance for algebraic identities between O(1) rational constants.
inline constexpr double kExactTolerance = 1e-12;

struct GeneratorId {
    std::string name;
    std::size_t index = 0;

    friend bool operator==(const GeneratorId&, const GeneratorId&) = default;
};

struct Term {
    std::size_t generator = 0;
    Coefficient coeff;
};

using LinearCombination = std::vector<Term>;

/// Structure constants c_ab^e of a finite-dimensional Lie algebra, [G_a, G_b] = sum_e c_ab^e G_e.
///
/// Both orderings (a,b) and (b,a) are stored so that a malformed (non-antisymmetric)
/// table can be represented and rejected by validation. Instances are immutable; use
/// TableBuilder to assemble one.
class StructureTable {
public:
    std::size_t dim() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    GeneratorId id(std::string_view name) const;
    GeneratorId id(std::size_t index) const;
    std::optional<GeneratorId> find(std::string_view name) const;

    Coefficient coefficient(std::size_t a, std::size_t b, std::size_t e) const {
        return coeffs_[(a * dim() + b) * dim() + e];
    }

    // Validates that `g` names a generator of this table with a matching index.
    void check(const GeneratorId& g) const;

private:
    friend class TableBuilder;
    StructureTable(std::vector<std::string> names, std::vector<Coefficient> coeffs)
        : names_(std::move(names)), coeffs_(std::move(coeffs)) {}

    std::vector<std::string> names_;
    std::vector<Coefficient> coeffs_;
};

class TableBuilder {
public:
    explicit TableBuilder(std::vector<std::string> names);
    explicit TableBuilder(const StructureTable& base);

    std::size_t index(std::string_view name) const;

    // Sets [a,b] = rhs and [b,a] = -rhs.
    TableBuilder& bracket(std::string_view a, std::string_view b,
                          const std::vector<std::pair<std::string, Coefficient>>& rhs);
    // Sets a single ordered entry c_ab^e, leaving (b,a) untouched.
    TableBuilder& raw(std::size_t a, std::size_t b, std::size_t e, Coefficient c);

    StructureTable build() const;

private:
    std::vector<std::string> names_;
    std::vector<Coefficient> coeffs_;
};

// Galilei algebra: rotations J, boosts X (mass one), translations P. With `with_time`, T is appended.
StructureTable galilei_spatial_table(bool with_time = false);

// Galilei algebra centrally extended by I with [X_i, P_j] = i delta_ij I.
StructureTable heisenberg_rotation_table(bool with_time = false);

// Appends a central u(1) generator with all brackets zero.
StructureTable with_central_u1(const StructureTable& tbl, std::string name = "I");

LinearCombination bracket(const GeneratorId& a, const GeneratorId& b, const StructureTable& tbl);

double antisymmetry_defect(const StructureTable& tbl);

// Max-norm of the Jacobi residual over all generator triples. Throws ValidationError
// when the table is not antisymmetric within kExactTolerance.
double jacobi_defect(const StructureTable& tbl);

bool is_central(const StructureTable& tbl, std::size_t generator, double tol = kExactTolerance);

// Max |c - c'| over all entries; tables must share generator names in the same order.
double max_difference(const StructureTable& lhs, const StructureTable& rhs);

/// Rescaling X -> X/k of a subset of generators. hbar is 1/k^2; k = infinity marks the
/// contraction limit (hbar = 0).
class ContractionParams {
public:
    ContractionParams(double k, std::set<std::string> scaled);

    // X_i and P_i scaled, the Inonu-Wigner contraction of the extended table.
    static ContractionParams heisenberg(double k);
    static ContractionParams limit(std::set<std::string> scaled);

    double k() const { return k_; }
    double hbar() const { return hbar_; }
    bool is_limit() const;
    const std::set<std::string>& scaled() const { return scaled_; }

    // Power n such that the rescaled constant is c_ab^e * k^n.
    int scaling_power(const StructureTable& tbl, std::size_t a, std::size_t b, std::size_t e) const;

private:
    double k_;
    double hbar_;
    std::set<std::string> scaled_;
};

StructureTable contract(const StructureTable& tbl, const ContractionParams& params);

// Inverse of contract at finite k.
StructureTable uncontract(const StructureTable& tbl, const ContractionParams& params);

// k -> infinity limit of the rescaled table; throws LimitError when any constant diverges.
StructureTable contraction_limit(const StructureTable& tbl, const std::set<std::string>& scaled);

// Plain-text serialization: a `generators:` line, then one `[A,B] = coeff*C + ...` line
// per nonzero bracket with A before B. `#` starts a comment.
std::string to_text(const StructureTable& tbl);
StructureTable parse_table(std::string_view text);
StructureTable read_table(std::istream& in);

std::string format_coefficient(Coefficient c);

}  // namespace qspace::algebra
