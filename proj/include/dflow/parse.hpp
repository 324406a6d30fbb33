#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dflow/ast.hpp"
#include "dflow/diag.hpp"

namespace dflow {

struct ParseResult {
    std::optional<WorkflowSpec> spec;  // engaged iff no error-level diagnostics
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return spec.has_value(); }
};

// Parses DSL source. Total over arbitrary byte strings: returns diagnostics,
// never throws. Deterministic. Collects as many diagnostics as it can recover.
ParseResult parse(std::string_view source);

// Canonical text form; parse(pretty_print(s)) is structurally equal to s.
std::string pretty_print(const WorkflowSpec& spec);

}  // namespace dflow
