// Fragment construction: groups invocations by the site they are assigned
// to and derives the import/export/transfer sets from the graph edges that
// cross fragment boundaries, plus workflow input delivery and output
// retrieval. Deterministic: fragments by site id, transfers by (ref, from, to).

#include "dflow/partition.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <tuple>

#include "dflow/errors.hpp"

namespace dflow {

std::vector<std::string> Fragment::node_ids() const {
    std::vector<std::string> ids;
    ids.reserve(nodes.size());
    for (const auto& n : nodes) ids.push_back(n.id);
    return ids;
}

bool operator==(const Import& a, const Import& b) {
    return a.ref == b.ref && a.from == b.from && a.bytes == b.bytes;
}
bool operator==(const FragmentNode& a, const FragmentNode& b) {
    return a.id == b.id && a.service == b.service && a.operation == b.operation &&
           a.args == b.args;
}
bool operator==(const Fragment& a, const Fragment& b) {
    return a.id == b.id && a.site == b.site && a.nodes == b.nodes && a.imports == b.imports &&
           a.exports == b.exports;
}
bool operator==(const Transfer& a, const Transfer& b) {
    return a.ref == b.ref && a.from == b.from && a.to == b.to && a.bytes == b.bytes;
}
bool operator==(const PlanDoc& a, const PlanDoc& b) {
    return a.workflow == b.workflow && a.fragments == b.fragments && a.transfers == b.transfers;
}

const Fragment* DeploymentPlan::fragment_by_id(const std::string& id) const {
    for (const auto& f : fragments)
        if (f.id == id) return &f;
    return nullptr;
}

const Fragment* DeploymentPlan::fragment_at_site(const std::string& site) const {
    for (const auto& f : fragments)
        if (f.site == site) return &f;
    return nullptr;
}

std::string DeploymentPlan::owner_of(const std::string& ref) const {
    if (ref == kInputRef) return kOrchestratorId;
    auto it = assignment.find(ref);
    if (it == assignment.end()) throw Error("unknown data ref: " + ref);
    const Fragment* f = fragment_at_site(it->second);
    if (!f) throw Error("no fragment at site " + it->second);
    return f->id;
}

static std::string fragment_id_for(const std::string& site) { return "f-" + site; }

DeploymentPlan partition_with_assignment(const WorkflowGraph& g, const Topology& sites,
                                         const std::map<std::string, std::string>& overrides) {
    DeploymentPlan plan;
    plan.workflow = g.workflow;
    plan.graph = g;
    plan.topology = sites;

    for (const auto& n : g.nodes) {
        auto it = overrides.find(n.id);
        const std::string& site = it != overrides.end() ? it->second : n.site;
        if (!sites.has_site(site)) throw UnknownSiteError(site);
        plan.assignment[n.id] = site;
    }

    // One fragment per site hosting at least one node, ordered by site id.
    std::map<std::string, Fragment> by_site;
    for (const auto& n : g.nodes) {
        const std::string& site = plan.assignment[n.id];
        Fragment& f = by_site[site];
        f.id = fragment_id_for(site);
        f.site = site;
        f.nodes.push_back({n.id, n.service, n.operation, n.args});
    }
    for (auto& [site, f] : by_site) {
        std::sort(f.nodes.begin(), f.nodes.end(),
                  [](const FragmentNode& a, const FragmentNode& b) { return a.id < b.id; });
    }

    auto owner_id = [&](const std::string& ref) -> std::string {
        if (ref == kInputRef) return kOrchestratorId;
        return fragment_id_for(plan.assignment.at(ref));
    };

    // Boundary-crossing edges become transfers, deduplicated per
    // (ref, from, to): a consumer fragment pulls each ref once and reuses it.
    std::map<std::tuple<std::string, std::string, std::string>, std::uint64_t> transfer_set;
    std::map<std::string, std::map<std::string, Import>> imports;  // fragment id -> ref -> Import
    std::map<std::string, std::set<std::string>> exports;          // fragment id -> refs

    for (const auto& e : g.edges) {
        const std::string to_site = plan.assignment.at(e.consumer);
        const std::string to_frag = fragment_id_for(to_site);
        const std::string from_frag = owner_id(e.producer);
        if (from_frag == to_frag) continue;
        transfer_set[{e.producer, from_frag, to_frag}] = e.bytes;
        imports[to_frag].insert({e.producer, Import{e.producer, from_frag, e.bytes}});
        if (from_frag != kOrchestratorId) exports[from_frag].insert(e.producer);
    }

    // Declared outputs return to the orchestrator; the workflow input needs
    // no transfer when it is itself an output.
    std::set<std::string> distinct_outputs(g.outputs.begin(), g.outputs.end());
    for (const auto& ref : distinct_outputs) {
        if (ref == kInputRef) continue;
        const std::string from_frag = owner_id(ref);
        transfer_set[{ref, from_frag, kOrchestratorId}] = g.ref_bytes(ref);
        exports[from_frag].insert(ref);
    }

    for (auto& [site, f] : by_site) {
        for (auto& [ref, imp] : imports[f.id]) f.imports.push_back(imp);
        for (const auto& ref : exports[f.id]) f.exports.push_back(ref);
        plan.fragments.push_back(std::move(f));
    }
    for (const auto& [key, bytes] : transfer_set) {
        const auto& [ref, from, to] = key;
        plan.transfers.push_back({ref, from, to, bytes});
    }
    return plan;
}

DeploymentPlan partition(const WorkflowGraph& g, const Topology& sites) {
    return partition_with_assignment(g, sites, {});
}

DeploymentPlan brute_force_min_cut(const WorkflowGraph& g, const Topology& sites,
                                   const CostModel& cm, const std::set<std::string>& movable) {
    if (movable.size() > 12)
        throw TooLargeError("brute_force_min_cut: " + std::to_string(movable.size()) +
                            " movable nodes exceed the enumeration bound of 12");
    for (const auto& id : movable)
        if (!g.find(id)) throw Error("movable node not in graph: " + id);

    std::vector<std::string> site_ids;
    for (const auto& s : sites.sites()) site_ids.push_back(s.id);
    std::sort(site_ids.begin(), site_ids.end());
    if (site_ids.empty()) throw UnknownSiteError("(no sites declared)");

    std::vector<std::string> nodes(movable.begin(), movable.end());  // sorted (std::set)
    std::vector<size_t> idx(nodes.size(), 0);

    std::optional<DeploymentPlan> best;
    std::uint64_t best_cost = 0;
    while (true) {
        std::map<std::string, std::string> overrides;
        for (size_t i = 0; i < nodes.size(); ++i) overrides[nodes[i]] = site_ids[idx[i]];
        DeploymentPlan plan = partition_with_assignment(g, sites, overrides);
        std::uint64_t cost = estimate_cost(plan, cm, ExecMode::Decentralised).total_bytes;
        if (!best || cost < best_cost) {
            best = std::move(plan);
            best_cost = cost;
        }
        // Lexicographic odometer over (node order, sorted site ids); the
        // first minimum found is the lexicographically smallest assignment.
        size_t k = idx.size();
        while (k > 0) {
            if (++idx[k - 1] < site_ids.size()) break;
            idx[k - 1] = 0;
            --k;
        }
        if (k == 0) break;
    }
    return std::move(*best);
}

}  // namespace dflow
