#pragma once

#include <string>
#include <vector>

namespace dflow {

enum class Severity { Error, Warning };

// Half-open source range, 1-based lines and columns.
struct Span {
    int line = 1;
    int col = 1;
    int end_line = 1;
    int end_col = 1;
};

// Error codes:
//   E001 syntax error            E002 duplicate name
//   E003 missing outputs clause  E004 malformed declaration
//   E010 undefined variable      E011 unknown service/operation
//   E012 arity mismatch          E013 unused binding (warning)
struct Diagnostic {
    std::string code;
    Severity severity = Severity::Error;
    std::string message;
    Span where;
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        if (d.severity == Severity::Error) return true;
    return false;
}

// "file:line:col: CODE message"
inline std::string format_diagnostic(const std::string& file, const Diagnostic& d) {
    return file + ":" + std::to_string(d.where.line) + ":" + std::to_string(d.where.col) +
           ": " + d.code + " " + d.message;
}

}  // namespace dflow
