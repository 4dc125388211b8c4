#include "qspace/fock.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "qspace/csv.hpp"
#include "qspace/errors.hpp"

namespace qspace::fock {

namespace {

void check_levels(std::size_t n_levels) {
    if (n_levels < 2) throw ValidationError("a truncated Fock space needs at least 2 levels");
}

void check_hbar(double hbar) {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ValidationError("hbar must be positive and finite");
}

void check_kind(const HamiltonianKind& kind) {
    if (kind.type == HamiltonianKind::Type::quartic && !(kind.lambda >= 0.0))
        throw ValidationError("quartic coupling must be nonnegative");
}

}  // namespace

FockOperator::FockOperator(ComplexMatrix matrix, double hbar, std::string label)
    : matrix_(std::move(matrix)), hbar_(hbar), label_(std::move(label)) {
    if (matrix_.rows() != matrix_.cols()) throw ValidationError("Fock operators must be square");
    if (matrix_.rows() < 1) throw ValidationError("empty Fock operator");
    check_hbar(hbar_);
}

bool FockOperator::is_hermitian(double tol) const { return hermiticity_defect(matrix_) <= tol; }

StateVector::StateVector(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() < 1) throw ValidationError("empty state vector");
    if (!amplitudes_.allFinite()) throw ValidationError("state amplitudes must be finite");
}

StateVector StateVector::vacuum(std::size_t n_levels) { return basis(n_levels, 0); }

StateVector StateVector::basis(std::size_t n_levels, std::size_t n) {
    if (n >= n_levels) throw ValidationError("basis index out of range");
    ComplexVector v = ComplexVector::Zero(Eigen::Index(n_levels));
    v(Eigen::Index(n)) = 1.0;
    return StateVector(std::move(v));
}

bool StateVector::is_normalized(double tol) const { return std::abs(norm() - 1.0) <= tol; }

StateVector StateVector::normalized() const {
    const double n = norm();
    if (n == 0.0) throw ValidationError("cannot normalize the zero vector");
    return StateVector(amplitudes_ / n);
}

std::string HamiltonianKind::name() const {
    switch (type) {
        case Type::harmonic: return "harmonic";
        case Type::free: return "free";
        case Type::quartic: return "quartic";
    }
    return "unknown";
}

Ladder build_ladder(std::size_t n_levels) {
    check_levels(n_levels);
    const auto n = Eigen::Index(n_levels);
    ComplexMatrix a = ComplexMatrix::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
    ComplexMatrix a_dag = a.adjoint();
    return {FockOperator(std::move(a), 1.0, "a"), FockOperator(std::move(a_dag), 1.0, "a_dag")};
}

Quadratures build_xp(std::size_t n_levels, double hbar) {
    check_hbar(hbar);
    const Ladder l = build_ladder(n_levels);
    const double s = std::sqrt(hbar / 2.0);
    ComplexMatrix x = s * (l.a.matrix() + l.a_dag.matrix());
    ComplexMatrix p = Complex(0.0, s) * (l.a_dag.matrix() - l.a.matrix());
    return {FockOperator(std::move(x), hbar, "X"), FockOperator(std::move(p), hbar, "P")};
}

CommutatorDefect commutator_defect(const FockOperator& x, const FockOperator& p) {
    if (x.n_levels() != p.n_levels()) throw ValidationError("X and P have different dimensions");
    if (x.hbar() != p.hbar()) throw ValidationError("X and P use different hbar");
    const auto n = Eigen::Index(x.n_levels());
    ComplexMatrix d = x.matrix() * p.matrix() - p.matrix() * x.matrix();
    d.diagonal().array() -= Complex(0.0, x.hbar());
    CommutatorDefect out;
    out.corner = d(n - 1, n - 1);
    d(n - 1, n - 1) = 0.0;
    out.interior_max = d.cwiseAbs().maxCoeff();
    return out;
}

FockOperator build_hamiltonian(const HamiltonianKind& kind, std::size_t n_levels, double hbar) {
    check_kind(kind);
    const Quadratures q = build_xp(n_levels, hbar);
    const ComplexMatrix x2 = q.x.matrix() * q.x.matrix();
    const ComplexMatrix p2 = q.p.matrix() * q.p.matrix();
    ComplexMatrix h;
    switch (kind.type) {
        case HamiltonianKind::Type::harmonic: h = 0.5 * (p2 + x2); break;
        case HamiltonianKind::Type::free: h = 0.5 * p2; break;
        case HamiltonianKind::Type::quartic: h = 0.5 * (p2 + x2) + kind.lambda * (x2 * x2); break;
    }
    return FockOperator(std::move(h), hbar, "H");
}

SparseMatrix sparse_position(std::size_t n_levels, double hbar) {
    check_levels(n_levels);
    check_hbar(hbar);
    const double s = std::sqrt(hbar / 2.0);
    std::vector<Eigen::Triplet<Complex>> t;
    for (std::size_t k = 1; k < n_levels; ++k) {
        const double v = s * std::sqrt(double(k));
        t.emplace_back(Eigen::Index(k - 1), Eigen::Index(k), v);
        t.emplace_back(Eigen::Index(k), Eigen::Index(k - 1), v);
    }
    const auto dim = Eigen::Index(n_levels);
    SparseMatrix m(dim, dim);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SparseMatrix sparse_momentum(std::size_t n_levels, double hbar) {
    check_levels(n_levels);
    check_hbar(hbar);
    const double s = std::sqrt(hbar / 2.0);
    std::vector<Eigen::Triplet<Complex>> t;
    for (std::size_t k = 1; k < n_levels; ++k) {
        const double v = s * std::sqrt(double(k));
        t.emplace_back(Eigen::Index(k - 1), Eigen::Index(k), Complex(0.0, -v));
        t.emplace_back(Eigen::Index(k), Eigen::Index(k - 1), Complex(0.0, v));
    }
    const auto dim = Eigen::Index(n_levels);
    SparseMatrix m(dim, dim);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SparseMatrix sparse_hamiltonian(const HamiltonianKind& kind, std::size_t n_levels, double hbar) {
    check_kind(kind);
    const SparseMatrix x = sparse_position(n_levels, hbar);
    const SparseMatrix p = sparse_momentum(n_levels, hbar);
    const SparseMatrix x2 = x * x;
    const SparseMatrix p2 = p * p;
    SparseMatrix h;
    switch (kind.type) {
        case HamiltonianKind::Type::harmonic: h = 0.5 * (p2 + x2); break;
        case HamiltonianKind::Type::free: h = 0.5 * p2; break;
        case HamiltonianKind::Type::quartic: {
            const SparseMatrix x4 = x2 * x2;
            h = 0.5 * (p2 + x2) + Complex(kind.lambda) * x4;
            break;
        }
    }
    h.prune(Complex(0.0));
    h.makeCompressed();
    return h;
}

double hermiticity_defect(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw ValidationError("hermiticity is defined for square matrices only");
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

Complex expectation(const FockOperator& op, const StateVector& psi) {
    if (op.n_levels() != psi.n_levels()) throw ValidationError("operator and state dimensions differ");
    return psi.amplitudes().dot(op.matrix() * psi.amplitudes());
}

double variance(const FockOperator& op, const StateVector& psi) {
    const Complex mean = expectation(op, psi);
    const ComplexVector shifted = op.matrix() * psi.amplitudes() - mean * psi.amplitudes();
    return shifted.squaredNorm();
}

FockOperator tensor_product(const FockOperator& a, const FockOperator& b) {
    const auto na = a.matrix().rows(), nb = b.matrix().rows();
    ComplexMatrix m(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j) m.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
    return FockOperator(std::move(m), a.hbar(), a.label() + "(x)" + b.label());
}

void write_operator_csv(std::ostream& out, const FockOperator& op) {
    CsvWriter csv(out);
    csv.comment("operator " + op.label() + ", N = " + std::to_string(op.n_levels()) + ", hbar = " +
                format_double(op.hbar()));
    csv.header({"row", "col", "re", "im"});
    const auto& m = op.matrix();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) csv.row({double(i), double(j), m(i, j).real(), m(i, j).imag()});
}

FockOperator read_operator_csv(std::istream& in, double hbar, std::string label) {
    struct Entry {
        std::size_t row, col;
        Complex value;
    };
    std::vector<Entry> entries;
    std::size_t dim = 0;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("row", 0) == 0) continue;
        }
        std::stringstream ss(line);
        std::string field;
        std::vector<double> values;
        while (std::getline(ss, field, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(field, &used));
                if (field.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw ParseError("malformed number '" + field + "'", line_no, 1);
            }
        }
        if (values.size() != 4) throw ParseError("expected 4 columns row,col,re,im", line_no, 1);
        if (values[0] < 0 || values[1] < 0 || values[0] != std::floor(values[0]) || values[1] != std::floor(values[1]))
            throw ParseError("row and col must be nonnegative integers", line_no, 1);
        Entry e{std::size_t(values[0]), std::size_t(values[1]), {values[2], values[3]}};
        dim = std::max({dim, e.row + 1, e.col + 1});
        entries.push_back(e);
    }
    if (dim == 0) throw ParseError("no operator entries", line_no, 1);
    ComplexMatrix m = ComplexMatrix::Zero(Eigen::Index(dim), Eigen::Index(dim));
    for (const auto& e : entries) m(Eigen::Index(e.row), Eigen::Index(e.col)) = e.value;
    return FockOperator(std::move(m), hbar, std::move(label));
}

}  // namespace qspace::fock
