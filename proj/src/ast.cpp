#include "dflow/ast.hpp"

namespace dflow {

// Structural equality: spans are presentation metadata and excluded, so a
// spec and its re-parsed pretty-print compare equal.

bool operator==(const OpDecl& a, const OpDecl& b) {
    return a.name == b.name && a.arity == b.arity;
}

bool operator==(const ServiceDecl& a, const ServiceDecl& b) {
    return a.name == b.name && a.site == b.site && a.operations == b.operations;
}

bool operator==(const ArgRef& a, const ArgRef& b) { return a.name == b.name; }

bool operator==(const Binding& a, const Binding& b) {
    return a.target == b.target && a.service == b.service && a.operation == b.operation &&
           a.args == b.args;
}

bool operator==(const OutputRef& a, const OutputRef& b) { return a.name == b.name; }

bool operator==(const WorkflowSpec& a, const WorkflowSpec& b) {
    return a.name == b.name && a.services == b.services && a.bindings == b.bindings &&
           a.outputs == b.outputs;
}

}  // namespace dflow
