#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qspace {

// Input violates an operation's precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A requested numerical guarantee cannot be met at the given resolution.
class PrecisionError : public std::runtime_error {
public:
    PrecisionError(const std::string& what, double estimate)
        : std::runtime_error(what), estimate_(estimate) {}

    double estimate() const { return estimate_; }

private:
    double estimate_;
};

// A structure constant diverges in the k -> infinity limit.
class LimitError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace qspace
