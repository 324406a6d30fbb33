#pragma once

#include <string>
#include <vector>

#include "dflow/diag.hpp"

namespace dflow {

// The reserved variable naming the workflow's initial input payload.
inline constexpr const char* kInputRef = "input";

struct OpDecl {
    std::string name;
    int arity = 0;
    Span where;
};

struct ServiceDecl {
    std::string name;
    std::string site;
    std::vector<OpDecl> operations;
    Span where;
};

struct ArgRef {
    std::string name;
    Span where;
};

struct Binding {
    std::string target;
    std::string service;
    std::string operation;
    std::vector<ArgRef> args;
    Span where;         // whole binding
    Span target_where;  // just the target identifier
};

struct OutputRef {
    std::string name;
    Span where;
};

// Parsed abstract form of a workflow. Structural equality ignores spans.
struct WorkflowSpec {
    std::string name;
    std::vector<ServiceDecl> services;
    std::vector<Binding> bindings;
    std::vector<OutputRef> outputs;
};

bool operator==(const OpDecl& a, const OpDecl& b);
bool operator==(const ServiceDecl& a, const ServiceDecl& b);
bool operator==(const ArgRef& a, const ArgRef& b);
bool operator==(const Binding& a, const Binding& b);
bool operator==(const OutputRef& a, const OutputRef& b);
bool operator==(const WorkflowSpec& a, const WorkflowSpec& b);

inline bool operator!=(const WorkflowSpec& a, const WorkflowSpec& b) { return !(a == b); }

}  // namespace dflow
