#include "dflow/graph.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "dflow/errors.hpp"

namespace dflow {

const InvocationNode* WorkflowGraph::find(const std::string& id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

std::uint64_t WorkflowGraph::ref_bytes(const std::string& ref) const {
    if (ref == kInputRef) return input_bytes;
    const InvocationNode* n = find(ref);
    if (!n) throw Error("unknown data ref: " + ref);
    return n->result_bytes;
}

bool WorkflowGraph::is_acyclic() const {
    // Color DFS over node-to-node edges; "input" cannot be part of a cycle.
    std::map<std::string, std::vector<std::string>> succ;
    for (const auto& e : edges)
        if (e.producer != kInputRef) succ[e.producer].push_back(e.consumer);

    std::map<std::string, int> color;  // 0 new, 1 on stack, 2 done
    std::function<bool(const std::string&)> visit = [&](const std::string& id) -> bool {
        int& c = color[id];
        if (c == 1) return false;
        if (c == 2) return true;
        c = 1;
        auto it = succ.find(id);
        if (it != succ.end())
            for (const auto& next : it->second)
                if (!visit(next)) return false;
        c = 2;
        return true;
    };
    for (const auto& n : nodes)
        if (!visit(n.id)) return false;
    return true;
}

WorkflowGraph build_graph(const CheckedWorkflow& w, const CostModel& sizes) {
    const WorkflowSpec& spec = w.spec();
    WorkflowGraph g;
    g.workflow = spec.name;
    g.input_bytes = sizes.input_bytes;

    std::map<std::string, const ServiceDecl*> services;
    for (const auto& svc : spec.services) services[svc.name] = &svc;

    for (const auto& b : spec.bindings) {
        InvocationNode n;
        n.id = b.target;
        n.service = b.service;
        n.operation = b.operation;
        n.site = services.at(b.service)->site;
        n.result_bytes = sizes.payload_bytes(b.service, b.operation);
        for (const auto& a : b.args) n.args.push_back(a.name);
        g.nodes.push_back(std::move(n));
    }
    // One edge per argument reference, sized by the producer's output.
    for (const auto& b : spec.bindings) {
        for (size_t i = 0; i < b.args.size(); ++i) {
            DataEdge e;
            e.producer = b.args[i].name;
            e.consumer = b.target;
            e.arg_index = static_cast<int>(i);
            e.bytes = g.ref_bytes(e.producer);
            g.edges.push_back(std::move(e));
        }
    }
    for (const auto& out : spec.outputs) g.outputs.push_back(out.name);
    return g;
}

std::vector<std::vector<std::string>> stages(const WorkflowGraph& g) {
    if (!g.is_acyclic()) throw CycleError("workflow graph contains a cycle");

    // Layer index = longest path from any source, over node-to-node edges.
    std::map<std::string, std::vector<std::string>> producers_of;
    for (const auto& e : g.edges)
        if (e.producer != kInputRef) producers_of[e.consumer].push_back(e.producer);

    std::map<std::string, int> depth;
    std::function<int(const std::string&)> depth_of = [&](const std::string& id) -> int {
        auto it = depth.find(id);
        if (it != depth.end()) return it->second;
        int d = 0;
        auto p = producers_of.find(id);
        if (p != producers_of.end())
            for (const auto& prod : p->second) d = std::max(d, depth_of(prod) + 1);
        depth[id] = d;
        return d;
    };

    int max_depth = -1;
    for (const auto& n : g.nodes) max_depth = std::max(max_depth, depth_of(n.id));

    std::vector<std::vector<std::string>> layers(static_cast<size_t>(max_depth + 1));
    for (const auto& n : g.nodes) layers[static_cast<size_t>(depth[n.id])].push_back(n.id);
    for (auto& layer : layers) std::sort(layer.begin(), layer.end());
    return layers;
}

const char* to_string(PatternKind k) {
    switch (k) {
        case PatternKind::Pipeline: return "Pipeline";
        case PatternKind::Aggregation: return "Aggregation";
        case PatternKind::Distribution: return "Distribution";
        case PatternKind::Composite: return "Composite";
    }
    return "?";
}

std::vector<PatternClass> classify(const WorkflowGraph& g) {
    std::map<std::string, int> indeg;
    std::map<std::string, int> outdeg;
    std::map<std::string, std::set<std::string>> consumers;  // node producer -> consumers
    std::map<std::string, std::string> chain_next;           // node-to-node edges only
    std::map<std::string, bool> has_node_pred;
    for (const auto& n : g.nodes) {
        indeg[n.id] = 0;
        outdeg[n.id] = 0;
    }
    for (const auto& e : g.edges) {
        indeg[e.consumer] += 1;
        if (e.producer != kInputRef) {
            outdeg[e.producer] += 1;
            consumers[e.producer].insert(e.consumer);
            chain_next[e.producer] = e.consumer;
            has_node_pred[e.consumer] = true;
        }
    }

    auto eligible = [&](const std::string& id) {
        return indeg[id] <= 1 && outdeg[id] <= 1;
    };

    // Longest maximal chain of eligible nodes; deterministic by scanning
    // chain heads in sorted order.
    std::vector<std::string> best_chain;
    std::vector<std::string> heads;
    for (const auto& n : g.nodes) {
        if (!eligible(n.id)) continue;
        bool pred_in_chain = false;
        for (const auto& e : g.edges) {
            if (e.producer != kInputRef && e.consumer == n.id && eligible(e.producer)) {
                pred_in_chain = true;
                break;
            }
        }
        if (!pred_in_chain) heads.push_back(n.id);
    }
    std::sort(heads.begin(), heads.end());
    for (const auto& head : heads) {
        std::vector<std::string> chain{head};
        std::string cur = head;
        while (outdeg[cur] == 1 && chain.size() <= g.nodes.size()) {
            const std::string& next = chain_next[cur];
            if (!eligible(next)) break;
            chain.push_back(next);
            cur = next;
        }
        if (chain.size() > best_chain.size()) best_chain = chain;
    }

    std::vector<std::string> agg_witness;
    for (const auto& n : g.nodes)
        if (indeg[n.id] >= 2) agg_witness.push_back(n.id);

    std::vector<std::string> dist_witness;
    for (const auto& n : g.nodes) {
        auto it = consumers.find(n.id);
        if (it != consumers.end() && it->second.size() >= 2) dist_witness.push_back(n.id);
    }

    std::vector<PatternClass> result;
    if (best_chain.size() >= 2)
        result.push_back({PatternKind::Pipeline, best_chain});
    if (!agg_witness.empty())
        result.push_back({PatternKind::Aggregation, agg_witness});
    if (!dist_witness.empty())
        result.push_back({PatternKind::Distribution, dist_witness});
    if (result.size() >= 2) {
        std::set<std::string> all;
        for (const auto& pc : result) all.insert(pc.witness.begin(), pc.witness.end());
        result.push_back({PatternKind::Composite, {all.begin(), all.end()}});
    }
    return result;
}

std::string to_edge_list(const WorkflowGraph& g) {
    std::vector<std::tuple<std::string, std::string, std::uint64_t>> rows;
    rows.reserve(g.edges.size());
    for (const auto& e : g.edges) rows.emplace_back(e.producer, e.consumer, e.bytes);
    std::sort(rows.begin(), rows.end());
    std::ostringstream out;
    for (const auto& [p, c, b] : rows) out << p << " -> " << c << " : " << b << "\n";
    return out.str();
}

}  // namespace dflow
