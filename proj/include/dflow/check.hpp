#pragma once

#include <optional>
#include <vector>

#include "dflow/ast.hpp"
#include "dflow/diag.hpp"

namespace dflow {

struct CheckResult;
CheckResult check(const WorkflowSpec& spec);

// A workflow that passed the checker. Only check() can construct one.
class CheckedWorkflow {
  public:
    const WorkflowSpec& spec() const { return spec_; }

  private:
    friend CheckResult check(const WorkflowSpec&);
    explicit CheckedWorkflow(WorkflowSpec s) : spec_(std::move(s)) {}
    WorkflowSpec spec_;
};

struct CheckResult {
    std::optional<CheckedWorkflow> checked;  // engaged iff no error-level diagnostics
    std::vector<Diagnostic> diagnostics;     // warnings included even on success
    bool ok() const { return checked.has_value(); }
};

}  // namespace dflow
