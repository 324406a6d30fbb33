#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dflow/check.hpp"
#include "dflow/cost.hpp"

namespace dflow {

// One service invocation (one binding). The node id is the binding target.
struct InvocationNode {
    std::string id;
    std::string service;
    std::string operation;
    std::string site;
    std::uint64_t result_bytes = 0;
    std::vector<std::string> args;  // data refs in call order; may repeat, may be "input"
};

// One data dependency per argument reference. producer is a node id or "input".
struct DataEdge {
    std::string producer;
    std::string consumer;
    std::uint64_t bytes = 0;
    int arg_index = 0;
};

struct WorkflowGraph {
    std::string workflow;
    std::vector<InvocationNode> nodes;  // binding order
    std::vector<DataEdge> edges;        // one per argument across all bindings
    std::vector<std::string> outputs;   // sink refs; may include "input"
    std::uint64_t input_bytes = 0;

    const InvocationNode* find(const std::string& id) const;
    // Result size of a data ref ("input" included).
    std::uint64_t ref_bytes(const std::string& ref) const;
    // Independent acyclicity verification (DFS), not implied by construction.
    bool is_acyclic() const;
};

WorkflowGraph build_graph(const CheckedWorkflow& w, const CostModel& sizes);

// Topological layering by longest path from the sources. Every node appears
// exactly once; all producers of a node sit in strictly earlier stages.
// Throws CycleError on a cyclic graph.
std::vector<std::vector<std::string>> stages(const WorkflowGraph& g);

enum class PatternKind { Pipeline, Aggregation, Distribution, Composite };
const char* to_string(PatternKind k);

struct PatternClass {
    PatternKind kind;
    std::vector<std::string> witness;  // node ids exhibiting the pattern
};

// Structural classification of the dataflow patterns present in the graph:
//   Pipeline     — a chain of length >= 2 of nodes with in/out degree <= 1
//   Aggregation  — some node consumes >= 2 incoming data edges
//   Distribution — some node's output feeds >= 2 consumers
//   Composite    — appended when several of the above co-occur
// A single isolated node yields an empty list.
std::vector<PatternClass> classify(const WorkflowGraph& g);

// Deterministic sorted edge list, one "producer -> consumer : bytes" per line.
std::string to_edge_list(const WorkflowGraph& g);

}  // namespace dflow
