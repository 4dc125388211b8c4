#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>
#include <set>
#include <tuple>
#include <sstream>

#include "qspace/algebra.hpp"
#include "qspace/errors.hpp"

namespace qspace::algebra {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class LineCursor {
public:
    LineCursor(std::string_view text, std::size_t line) : text_(text), line_(line) {}

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool done() {
        skip_ws();
        return pos_ >= text_.size();
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }
    bool accept(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }
    std::string name() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
        if (start == pos_) fail("expected a generator name");
        return std::string(text_.substr(start, pos_ - start));
    }
    // A generator name with an implicit unit coefficient; a lone `i` is the imaginary unit.
    bool bare_name_ahead() {
        skip_ws();
        if (pos_ >= text_.size()) return false;
        const char c = text_[pos_];
        if (!std::isalpha(static_cast<unsigned char>(c)) && c != '_') return false;
        return !(c == 'i' && (pos_ + 1 == text_.size() || !is_name_char(text_[pos_ + 1])));
    }
    double number() {
        skip_ws();
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr == first) fail("expected a number");
        pos_ += std::size_t(ptr - first);
        return v;
    }
    // real | real 'i' | 'i' | '(' real ('+'|'-') real 'i' ')'
    Coefficient coefficient() {
        if (accept('(')) {
            const double re = number();
            skip_ws();
            double sign = 1.0;
            if (accept('+')) sign = 1.0;
            else if (accept('-')) sign = -1.0;
            else fail("expected '+' or '-' in complex coefficient");
            const double im = number();
            expect('i');
            expect(')');
            return {re, sign * im};
        }
        if (peek() == 'i') {
            ++pos_;
            return {0.0, 1.0};
        }
        const double v = number();
        if (pos_ < text_.size() && text_[pos_] == 'i') {
            ++pos_;
            return {0.0, v};
        }
        return {v, 0.0};
    }
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, pos_ + 1); }
    std::size_t column() const { return pos_ + 1; }

private:
    std::string_view text_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string format_coefficient(Coefficient c) {
    if (c.imag() == 0.0) return shortest(c.real());
    if (c.real() == 0.0) return shortest(c.imag()) + "i";
    return "(" + shortest(c.real()) + (c.imag() < 0 ? "-" : "+") + shortest(std::abs(c.imag())) + "i)";
}

std::string to_text(const StructureTable& tbl) {
    std::ostringstream out;
    const auto& names = tbl.names();
    out << "generators:";
    for (const auto& n : names) out << ' ' << n;
    out << '\n';
    auto write_line = [&](std::size_t a, std::size_t b) {
        bool first = true;
        for (std::size_t e = 0; e < tbl.dim(); ++e) {
            const Coefficient c = tbl.coefficient(a, b, e);
            if (c == Coefficient{}) continue;
            if (first) out << '[' << names[a] << ',' << names[b] << "] = ";
            else out << " + ";
            out << format_coefficient(c) << '*' << names[e];
            first = false;
        }
        if (!first) out << '\n';
    };
    for (std::size_t a = 0; a < tbl.dim(); ++a) {
        for (std::size_t b = a + 1; b < tbl.dim(); ++b) {
            write_line(a, b);
            bool antisymmetric = true;
            for (std::size_t e = 0; e < tbl.dim(); ++e)
                if (tbl.coefficient(b, a, e) != -tbl.coefficient(a, b, e)) antisymmetric = false;
            if (!antisymmetric) write_line(b, a);
        }
    }
    return out.str();
}

StructureTable parse_table(std::string_view text) {
    std::optional<TableBuilder> builder;
    std::vector<std::string> names;
    std::set<std::pair<std::size_t, std::size_t>> explicit_pairs;
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t, Coefficient>> entries;

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        LineCursor cur(line, line_no);
        if (cur.done()) {
            if (end == text.size()) break;
            continue;
        }

        if (cur.peek() != '[') {
            const std::string keyword = cur.name();
            if (keyword != "generators") cur.fail("expected 'generators:' or a bracket line");
            if (builder) cur.fail("generators declared twice");
            cur.expect(':');
            while (!cur.done()) {
                cur.accept(',');
                if (cur.done()) break;
                names.push_back(cur.name());
            }
            try {
                builder.emplace(names);
            } catch (const ValidationError& e) {
                throw ParseError(e.what(), line_no, 1);
            }
        } else {
            if (!builder) cur.fail("bracket before the 'generators:' declaration");
            cur.expect('[');
            const std::size_t name_col = cur.column();
            auto lookup = [&](const std::string& n) {
                try {
                    return builder->index(n);
                } catch (const ValidationError&) {
                    throw ParseError("unknown generator '" + n + "'", line_no, name_col);
                }
            };
            const std::size_t a = lookup(cur.name());
            cur.expect(',');
            const std::size_t b = lookup(cur.name());
            cur.expect(']');
            cur.expect('=');
            if (a == b) cur.fail("a generator always commutes with itself");
            if (!explicit_pairs.insert({a, b}).second) cur.fail("bracket listed twice");
            bool first = true;
            while (!cur.done()) {
                double sign = 1.0;
                if (cur.accept('-')) sign = -1.0;
                else if (!cur.accept('+') && !first) cur.fail("expected '+' or '-' between terms");
                Coefficient c = sign;
                if (!cur.bare_name_ahead()) {
                    c *= cur.coefficient();
                    cur.expect('*');
                }
                const std::size_t e = lookup(cur.name());
                entries.emplace_back(a, b, e, c);
                first = false;
            }
            if (first) cur.fail("empty right-hand side; omit zero brackets");
        }
        if (end == text.size()) break;
    }
    if (!builder) throw ParseError("missing 'generators:' declaration", line_no, 1);

    const std::size_t d = names.size();
    std::vector<Coefficient> dense(d * d * d);
    for (const auto& [a, b, e, c] : entries) {
        dense[(a * d + b) * d + e] += c;
        if (!explicit_pairs.count({b, a})) dense[(b * d + a) * d + e] -= c;
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            for (std::size_t e = 0; e < d; ++e)
                if (dense[(a * d + b) * d + e] != Coefficient{}) builder->raw(a, b, e, dense[(a * d + b) * d + e]);
    return builder->build();
}

StructureTable read_table(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_table(text);
}

}  // namespace qspace::algebra
