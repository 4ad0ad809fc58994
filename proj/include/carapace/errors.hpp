#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace carapace {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string &message)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column), message_(message) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::string &message() const { return message_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

enum class DiagnosticKind {
    RangeRestriction,
    UnorderableBuiltin,
    NoRelationAtom,
    ArityMismatch,
    TypeConflict,
};

struct Diagnostic {
    DiagnosticKind kind;
    std::string relation;
    std::optional<std::size_t> rule;
    std::string message;
};

inline std::string format_diagnostics(const std::vector<Diagnostic> &diags) {
    std::string out;
    for (const auto &d : diags) {
        if (!out.empty())
            out += '\n';
        out += d.message;
    }
    return out;
}

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Diagnostic> diags)
        : std::runtime_error(format_diagnostics(diags)), diagnostics_(std::move(diags)) {}

    const std::vector<Diagnostic> &diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

/// Reading or writing a file failed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace carapace
