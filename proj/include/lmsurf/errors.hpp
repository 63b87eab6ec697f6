// errors.hpp - exception types shared by every lmsurf module.
//
// The CLI maps these onto exit codes: DomainError and ConfigError are usage
// problems (exit 2); NumericalError and BudgetError are runtime failures
// (exit 1).

#pragma once

#include <stdexcept>
#include <string>

namespace lmsurf {

/// An input outside the domain of a physical formula or a violated invariant.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed config or pattern text. Carries the 1-based location when known.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg, int line = 0, int column = 0)
        : std::runtime_error(format(msg, line, column)), line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    static std::string format(const std::string& msg, int line, int column) {
        if (line <= 0) return msg;
        std::string where = "line " + std::to_string(line);
        if (column > 0) where += ", column " + std::to_string(column);
        return where + ": " + msg;
    }

    int line_;
    int column_;
};

/// Solver blow-up or NaN.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A grid larger than the configured cell budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binary or CSV file that does not match the expected layout.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lmsurf
