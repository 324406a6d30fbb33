// Correctness checker: verifies every WorkflowSpec invariant and reports all
// violations, not just the first. Pure; two calls on the same spec return
// identical results.

#include "dflow/check.hpp"

#include <map>
#include <set>
#include <string>

namespace dflow {

CheckResult check(const WorkflowSpec& spec) {
    CheckResult result;
    auto& diags = result.diagnostics;

    std::map<std::string, const ServiceDecl*> services;
    for (const auto& svc : spec.services) {
        if (!services.emplace(svc.name, &svc).second)
            diags.push_back({"E002", Severity::Error,
                             "duplicate service name '" + svc.name + "'", svc.where});
        if (svc.site.empty())
            diags.push_back({"E004", Severity::Error,
                             "service '" + svc.name + "' declares an empty site", svc.where});
        for (const auto& op : svc.operations) {
            if (op.arity < 0)
                diags.push_back({"E004", Severity::Error,
                                 "operation '" + op.name + "' has negative arity", op.where});
        }
    }

    std::set<std::string> defined{kInputRef};
    std::set<std::string> referenced;
    for (const auto& b : spec.bindings) {
        for (const auto& arg : b.args) {
            if (!defined.count(arg.name)) {
                diags.push_back({"E010", Severity::Error,
                                 "undefined variable '" + arg.name + "'", arg.where});
            }
            referenced.insert(arg.name);
        }
        auto it = services.find(b.service);
        if (it == services.end()) {
            diags.push_back({"E011", Severity::Error,
                             "unknown service '" + b.service + "'", b.where});
        } else {
            const OpDecl* op = nullptr;
            for (const auto& o : it->second->operations)
                if (o.name == b.operation) {
                    op = &o;
                    break;
                }
            if (!op) {
                diags.push_back({"E011", Severity::Error,
                                 "service '" + b.service + "' has no operation '" +
                                     b.operation + "'",
                                 b.where});
            } else if (static_cast<size_t>(op->arity) != b.args.size()) {
                diags.push_back({"E012", Severity::Error,
                                 "operation '" + b.service + "." + b.operation + "' expects " +
                                     std::to_string(op->arity) + " argument(s), got " +
                                     std::to_string(b.args.size()),
                                 b.where});
            }
        }
        if (b.target == kInputRef) {
            diags.push_back({"E002", Severity::Error,
                             "'input' is reserved and cannot be a binding target",
                             b.target_where});
        } else if (!defined.insert(b.target).second) {
            diags.push_back({"E002", Severity::Error,
                             "duplicate variable name '" + b.target + "'", b.target_where});
        }
    }

    if (spec.outputs.empty()) {
        diags.push_back({"E003", Severity::Error, "workflow must declare outputs", Span{}});
    }
    for (const auto& out : spec.outputs) {
        if (!defined.count(out.name))
            diags.push_back({"E010", Severity::Error,
                             "undefined variable '" + out.name + "'", out.where});
        referenced.insert(out.name);
    }

    for (const auto& b : spec.bindings) {
        if (!referenced.count(b.target) && b.target != kInputRef)
            diags.push_back({"E013", Severity::Warning,
                             "binding '" + b.target + "' is never used", b.target_where});
    }

    if (!has_errors(diags)) result.checked = CheckedWorkflow(spec);
    return result;
}

}  // namespace dflow
