#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qspace {

// Shortest round-trip decimal form; `nan`, `inf`, `-inf` for non-finite values.
std::string format_double(double v);

/// Comma-separated rows with `\n` line endings. Lines passed to comment() are
/// prefixed with `# ` so gnuplot and most CSV readers skip them.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void comment(std::string_view text);
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);
    void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

private:
    std::ostream& out_;
};

}  // namespace qspace
