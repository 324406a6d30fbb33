// Analytic cost and makespan predictor. Mirrors the runtime's exact message
// census so the decentralised estimate reconciles with a simulated trace
// byte-for-byte: with a zero envelope the total reduces to the sum over
// plan.transfers; otherwise the control messages (dispatch, request,
// complete) are accounted with the same envelope arithmetic the transports
// use. Makespan follows the critical path under the per-link
// latency + size/bandwidth delivery model: greedy data-driven firing for the
// decentralised mode, stage-synchronised rounds for the centralised hub.
//
// Service invocations are modeled as co-located with the node's assigned
// site (zero inter-site bytes), which holds for every plan produced by
// partition(); plans with placement overrides are cost oracles, not
// executable deployments.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>

#include "dflow/errors.hpp"
#include "dflow/partition.hpp"

namespace dflow {

namespace {

struct HopMath {
    const Topology& topo;
    double envelope;

    static double frame(double t, const LinkModel& l, double bytes) {
        return t + l.latency_s + bytes / l.bandwidth_Bps;
    }
    // Control-only message: single header frame.
    double ctrl(double t, const std::string& from, const std::string& to) const {
        return frame(t, topo.link(from, to), envelope);
    }
    // Header frame plus one payload frame; usable when both arrived.
    double data(double t, const std::string& from, const std::string& to, double bytes) const {
        LinkModel l = topo.link(from, to);
        return std::max(frame(t, l, envelope), frame(t, l, bytes));
    }
};

}  // namespace

static CostEstimate estimate_decentralised(const DeploymentPlan& plan, const CostModel& cm,
                                           double delay) {
    const WorkflowGraph& g = plan.graph;
    const std::string orch_site = plan.topology.orchestrator_site();
    const std::uint64_t E = cm.control_overhead_bytes;
    HopMath hop{plan.topology, static_cast<double>(E)};

    CostEstimate est;
    auto account = [&](const std::string& from_site, const std::string& to_site,
                       std::uint64_t payload, bool carries_payload) {
        if (from_site == to_site) return;
        est.total_bytes += E + payload;
        if (carries_payload) {
            est.data_bytes += E + payload;
            est.payload_bytes += payload;
        }
    };

    std::map<std::string, std::string> frag_site;  // fragment id -> site
    for (const auto& f : plan.fragments) frag_site[f.id] = f.site;
    auto site_of = [&](const std::string& party) -> const std::string& {
        if (party == kOrchestratorId) return orch_site;
        return frag_site.at(party);
    };

    // --- byte census ---
    for (const auto& f : plan.fragments) {
        account(orch_site, f.site, 0, false);  // Dispatch
        account(f.site, orch_site, 0, false);  // Complete
        for (const auto& imp : f.imports)
            account(f.site, site_of(imp.from), 0, false);  // DataRequest
    }
    std::set<std::string> distinct_outputs(g.outputs.begin(), g.outputs.end());
    for (const auto& ref : distinct_outputs) {
        if (ref == kInputRef) continue;
        account(orch_site, site_of(plan.owner_of(ref)), 0, false);  // output DataRequest
    }
    for (const auto& t : plan.transfers)
        account(site_of(t.from), site_of(t.to), t.bytes, true);  // DataResponse

    // --- makespan: greedy pull schedule ---
    std::map<std::string, double> dispatch_at;
    for (const auto& f : plan.fragments) dispatch_at[f.id] = hop.ctrl(0.0, orch_site, f.site);

    std::map<std::string, const FragmentNode*> node_table;
    std::map<std::string, std::string> node_frag;
    for (const auto& f : plan.fragments)
        for (const auto& n : f.nodes) {
            node_table[n.id] = &n;
            node_frag[n.id] = f.id;
        }

    std::map<std::string, double> ready;                        // node id -> result stored
    std::map<std::pair<std::string, std::string>, double> avail;  // (ref, frag) -> usable

    std::function<double(const std::string&)> ready_of;
    std::function<double(const std::string&, const std::string&)> avail_at;

    avail_at = [&](const std::string& ref, const std::string& frag) -> double {
        auto key = std::make_pair(ref, frag);
        auto it = avail.find(key);
        if (it != avail.end()) return it->second;
        const std::string owner = plan.owner_of(ref);
        double t;
        if (owner == frag) {
            t = ready_of(ref);
        } else {
            const std::string& here = site_of(frag);
            const std::string& there = site_of(owner);
            double request_arrives = hop.ctrl(dispatch_at.at(frag), here, there);
            double produced = ref == kInputRef ? 0.0 : ready_of(ref);
            double sent = std::max(request_arrives, produced);
            t = hop.data(sent, there, here, static_cast<double>(g.ref_bytes(ref)));
        }
        avail[key] = t;
        return t;
    };

    ready_of = [&](const std::string& id) -> double {
        auto it = ready.find(id);
        if (it != ready.end()) return it->second;
        const std::string& frag = node_frag.at(id);
        double args_at = dispatch_at.at(frag);
        for (const auto& arg : node_table.at(id)->args)
            args_at = std::max(args_at, avail_at(arg, frag));
        double t = args_at + delay;  // local stub round trip costs only the delay
        ready[id] = t;
        return t;
    };

    double makespan = 0.0;
    for (const auto& ref : distinct_outputs) {
        if (ref == kInputRef) continue;  // already at the orchestrator
        const std::string owner = plan.owner_of(ref);
        double request_arrives = hop.ctrl(0.0, orch_site, site_of(owner));
        double sent = std::max(request_arrives, ready_of(ref));
        double arrived =
            hop.data(sent, site_of(owner), orch_site, static_cast<double>(g.ref_bytes(ref)));
        makespan = std::max(makespan, arrived);
    }
    for (const auto& f : plan.fragments) {
        double finished = dispatch_at.at(f.id);
        for (const auto& n : f.nodes) finished = std::max(finished, ready_of(n.id));
        makespan = std::max(makespan, hop.ctrl(finished, f.site, orch_site));
    }
    est.makespan_s = makespan;
    return est;
}

static CostEstimate estimate_centralised(const DeploymentPlan& plan, const CostModel& cm,
                                         double delay) {
    const WorkflowGraph& g = plan.graph;
    const std::string orch_site = plan.topology.orchestrator_site();
    const std::uint64_t E = cm.control_overhead_bytes;

    CostEstimate est;
    auto account = [&](const std::string& site, std::uint64_t payload) {
        if (site == orch_site) return;
        est.total_bytes += E + payload;
        est.data_bytes += E + payload;
        est.payload_bytes += payload;
    };
    for (const auto& n : g.nodes) {
        std::uint64_t args_total = 0;
        for (const auto& arg : n.args) args_total += g.ref_bytes(arg);
        account(n.site, args_total);                                  // Invoke + arg frames
        std::uint64_t result = cm.payload_bytes(n.service, n.operation);
        account(n.site, result);                                      // InvokeResult
    }

    // Stage-synchronised rounds: every stage-k result returns to the engine
    // before any stage-(k+1) invoke leaves. Frames on a shared engine<->stub
    // connection deliver FIFO, which the chained maxima reproduce.
    std::map<std::pair<std::string, std::string>, double> pair_last;
    auto deliver = [&](const std::string& from_ep, const std::string& to_ep,
                       const LinkModel& l, double t, double bytes) {
        double d = HopMath::frame(t, l, bytes);
        auto key = std::make_pair(from_ep, to_ep);
        auto it = pair_last.find(key);
        if (it != pair_last.end()) d = std::max(d, it->second);
        pair_last[key] = d;
        return d;
    };

    double stage_start = 0.0;
    double makespan = 0.0;
    for (const auto& layer : stages(g)) {
        double stage_end = stage_start;
        for (const auto& id : layer) {
            const InvocationNode& n = *g.find(id);
            const std::string svc_ep = "svc:" + n.service;
            LinkModel down = plan.topology.link(orch_site, n.site);
            double fire = deliver(kOrchestratorId, svc_ep, down, stage_start,
                                  static_cast<double>(E));
            for (const auto& arg : n.args)
                fire = std::max(fire, deliver(kOrchestratorId, svc_ep, down, stage_start,
                                              static_cast<double>(g.ref_bytes(arg))));
            double sent = fire + delay;
            LinkModel up = plan.topology.link(n.site, orch_site);
            double back = deliver(svc_ep, kOrchestratorId, up, sent, static_cast<double>(E));
            back = std::max(back, deliver(svc_ep, kOrchestratorId, up, sent,
                                          static_cast<double>(n.result_bytes)));
            stage_end = std::max(stage_end, back);
        }
        stage_start = stage_end;
        makespan = stage_end;
    }
    est.makespan_s = makespan;
    return est;
}

CostEstimate estimate_cost(const DeploymentPlan& plan, const CostModel& cm, ExecMode mode,
                           double service_delay_s) {
    // Surface MissingSizeError before any arithmetic.
    for (const auto& n : plan.graph.nodes) cm.payload_bytes(n.service, n.operation);
    if (mode == ExecMode::Decentralised)
        return estimate_decentralised(plan, cm, service_delay_s);
    return estimate_centralised(plan, cm, service_delay_s);
}

}  // namespace dflow
