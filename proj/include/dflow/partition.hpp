#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dflow/cost.hpp"
#include "dflow/graph.hpp"
#include "dflow/topology.hpp"

namespace dflow {

// Endpoint name for the orchestration service in plans and transfers.
inline constexpr const char* kOrchestratorId = "orchestrator";

struct Import {
    std::string ref;
    std::string from;  // fragment id or "orchestrator"
    std::uint64_t bytes = 0;
};

// Node entry carried inside a fragment; enough for a proxy to execute it.
struct FragmentNode {
    std::string id;
    std::string service;
    std::string operation;
    std::vector<std::string> args;  // data refs in call order
};

// The invocations assigned to one site plus the data refs crossing its
// boundary.
struct Fragment {
    std::string id;
    std::string site;
    std::vector<FragmentNode> nodes;   // sorted by node id
    std::vector<Import> imports;       // sorted by ref
    std::vector<std::string> exports;  // sorted refs other parties will request

    std::vector<std::string> node_ids() const;
};

struct Transfer {
    std::string ref;
    std::string from;  // fragment id or "orchestrator"
    std::string to;    // fragment id or "orchestrator"
    std::uint64_t bytes = 0;
};

struct DeploymentPlan {
    std::string workflow;
    std::vector<Fragment> fragments;  // sorted by site id
    std::vector<Transfer> transfers;  // sorted by (ref, from, to)

    // Execution/estimation context; not part of the serialized document.
    WorkflowGraph graph;
    Topology topology;
    std::map<std::string, std::string> assignment;  // node id -> site

    const Fragment* fragment_by_id(const std::string& id) const;
    const Fragment* fragment_at_site(const std::string& site) const;
    // Fragment id owning a data ref; "orchestrator" for the workflow input.
    std::string owner_of(const std::string& ref) const;
};

// Groups nodes by the site their service is pinned to; one fragment per site
// hosting at least one node. Deterministic: fragments ordered by site id.
// Throws UnknownSiteError when a node's site is not declared in the topology.
DeploymentPlan partition(const WorkflowGraph& g, const Topology& sites);

// Same, with explicit site assignments for some nodes (placement overrides).
DeploymentPlan partition_with_assignment(const WorkflowGraph& g, const Topology& sites,
                                         const std::map<std::string, std::string>& overrides);

enum class ExecMode { Centralised, Decentralised };

struct CostEstimate {
    std::uint64_t payload_bytes = 0;  // inter-site data payloads only
    std::uint64_t data_bytes = 0;     // payload-carrying messages incl. envelopes
    std::uint64_t total_bytes = 0;    // every inter-site message incl. envelopes
    double makespan_s = 0.0;          // critical-path prediction
};

// Predicts the byte totals and makespan of executing the plan in the given
// mode. Mirrors the runtime's message census exactly: with zero control
// overhead the decentralised total equals the sum over plan.transfers.
// service_delay_s is the per-invocation stub processing delay.
CostEstimate estimate_cost(const DeploymentPlan& plan, const CostModel& cm, ExecMode mode,
                           double service_delay_s = 0.0);

// Exhaustive placement oracle: enumerates all site assignments of `movable`
// nodes (others stay pinned) and returns the plan minimizing the
// decentralised total bytes. Ties break toward lexicographically smaller
// site assignments. Throws TooLargeError when |movable| > 12.
DeploymentPlan brute_force_min_cut(const WorkflowGraph& g, const Topology& sites,
                                   const CostModel& cm, const std::set<std::string>& movable);

// Canonical JSON document (sorted keys, fragments by site id). This is also
// the wire payload the orchestrator dispatches per fragment.
nlohmann::json fragment_to_json(const Fragment& f);
Fragment fragment_from_json(const nlohmann::json& j);
nlohmann::json plan_to_json(const DeploymentPlan& plan);
std::string plan_to_canonical_string(const DeploymentPlan& plan);

// The JSON-visible part of a plan, for round-trips.
struct PlanDoc {
    std::string workflow;
    std::vector<Fragment> fragments;
    std::vector<Transfer> transfers;
};
PlanDoc plan_from_json(const nlohmann::json& j);

bool operator==(const Import& a, const Import& b);
bool operator==(const FragmentNode& a, const FragmentNode& b);
bool operator==(const Fragment& a, const Fragment& b);
bool operator==(const Transfer& a, const Transfer& b);
bool operator==(const PlanDoc& a, const PlanDoc& b);

}  // namespace dflow
