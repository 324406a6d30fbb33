// Orchestration service, proxy engine, stub services, and the centralised
// baseline engine.
//
// Decentralised runs are pull-based: the orchestrator dispatches each
// fragment to its site's proxy and requests the declared outputs up front;
// each proxy requests its imports once at dispatch time and the owner
// answers when the value is ready. Within a proxy, any node whose arguments
// are all present fires (data-driven, at most once), invoking the stub
// service co-located at its site. After all nodes fire the proxy sends
// Complete and keeps serving export requests.
//
// The centralised engine instead walks the topological stages and routes
// every argument and every result through itself, one Invoke/InvokeResult
// round trip per node, starting stage k+1 only when all of stage k returned.

#include "dflow/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <mutex>
#include <set>

#include "dflow/errors.hpp"

namespace dflow {

std::string proxy_endpoint(const std::string& site) { return "proxy:" + site; }
std::string stub_endpoint(const std::string& service) { return "svc:" + service; }

// ---------------------------------------------------------------------------
// deterministic payload generation

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(const void* data, size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a_str(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a(s.data(), s.size(), h);
}

// Content digest: size plus a bounded sample (whole buffer when small).
std::uint64_t payload_digest(const Payload& p) {
    std::uint64_t size = p ? p->size() : 0;
    std::uint64_t h = fnv1a(&size, sizeof size);
    if (!p || p->empty()) return h;
    constexpr size_t kSample = 2048;
    if (p->size() <= 2 * kSample) return fnv1a(p->data(), p->size(), h);
    h = fnv1a(p->data(), kSample, h);
    return fnv1a(p->data() + p->size() - kSample, kSample, h);
}

Payload fill_payload(std::uint64_t seed, std::uint64_t size) {
    std::vector<std::uint8_t> bytes(size);
    std::uint64_t state = seed;
    size_t i = 0;
    for (; i + 8 <= bytes.size(); i += 8) {
        std::uint64_t w = splitmix64(state);
        std::memcpy(bytes.data() + i, &w, 8);
    }
    if (i < bytes.size()) {
        std::uint64_t w = splitmix64(state);
        std::memcpy(bytes.data() + i, &w, bytes.size() - i);
    }
    return make_payload(std::move(bytes));
}

}  // namespace

Payload make_input_payload(std::uint64_t size, std::uint64_t seed) {
    std::uint64_t h = fnv1a_str("workflow-input");
    h ^= seed * 0x9e3779b97f4a7c15ULL;
    return fill_payload(h, size);
}

Payload make_stub_output(const std::string& service, const std::string& op,
                         const std::vector<Payload>& args, std::uint64_t size) {
    std::uint64_t h = fnv1a_str(service);
    h = fnv1a_str(op, h);
    for (const auto& a : args) {
        std::uint64_t d = payload_digest(a);
        h = fnv1a(&d, sizeof d, h);
    }
    return fill_payload(h, size);
}

// ---------------------------------------------------------------------------
// execution trace

void ExecutionTrace::record(const TraceEvent& ev) {
    std::lock_guard<std::mutex> lock(mutex_);
    events_.push_back(ev);
}

std::uint64_t ExecutionTrace::total_bytes() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::uint64_t n = 0;
    for (const auto& e : events_) n += e.total_bytes;
    return n;
}

std::uint64_t ExecutionTrace::wan_total_bytes() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::uint64_t n = 0;
    for (const auto& e : events_)
        if (e.inter_site) n += e.total_bytes;
    return n;
}

std::uint64_t ExecutionTrace::wan_payload_bytes() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::uint64_t n = 0;
    for (const auto& e : events_) {
        if (!e.inter_site) continue;
        if (e.kind == MsgKind::DataResponse || e.kind == MsgKind::Invoke ||
            e.kind == MsgKind::InvokeResult)
            n += e.payload_bytes;
    }
    return n;
}

std::uint64_t ExecutionTrace::count(MsgKind kind, bool inter_site_only) const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::uint64_t n = 0;
    for (const auto& e : events_)
        if (e.kind == kind && (!inter_site_only || e.inter_site)) ++n;
    return n;
}

namespace {

void record_delivery(const std::shared_ptr<ExecutionTrace>& trace, Transport& net,
                     const Message& msg, double now) {
    if (!trace) return;
    TraceEvent ev;
    ev.t = now;
    ev.from = msg.from;
    ev.to = msg.to;
    ev.kind = msg.kind;
    ev.payload_bytes = msg.payload_size();
    ev.total_bytes = msg.wire_size(net.envelope_bytes());
    ev.correlation_id = msg.correlation_id;
    ev.ref = msg.ref;
    try {
        ev.inter_site = net.site_of(msg.from) != net.site_of(msg.to);
    } catch (const EndpointUnknownError&) {
        ev.inter_site = false;
    }
    trace->record(ev);
}

// ---------------------------------------------------------------------------
// stub service actor

struct StubActor {
    std::string service;
    std::map<std::string, int> ops;  // operation -> arity
    CostModel cm;
    double delay_s = 0;
    Transport* net = nullptr;
    std::shared_ptr<ExecutionTrace> trace;

    void on_message(const Message& msg, double now) {
        record_delivery(trace, *net, msg, now);
        if (msg.kind == MsgKind::Cancel) return;

        Message reply;
        reply.kind = MsgKind::InvokeResult;
        reply.correlation_id = msg.correlation_id;
        reply.run_id = msg.run_id;
        reply.from = msg.to;
        reply.to = msg.from;
        reply.ref = msg.ref;

        if (msg.kind != MsgKind::Invoke) {
            reply.error = true;
            reply.body = {{"reason", std::string("protocol error: unexpected ") +
                                         to_string(msg.kind)}};
            net->send(std::move(reply));
            return;
        }
        const std::string op = msg.body.value("operation", std::string{});
        auto it = ops.find(op);
        if (it == ops.end()) {
            reply.error = true;
            reply.body = {{"reason", "protocol error: unknown operation '" + op + "'"}};
            net->send(std::move(reply));
            return;
        }
        if (static_cast<size_t>(it->second) != msg.payloads.size()) {
            reply.error = true;
            reply.body = {{"reason", "protocol error: operation '" + op + "' expects " +
                                         std::to_string(it->second) + " argument(s), got " +
                                         std::to_string(msg.payloads.size())}};
            net->send(std::move(reply));
            return;
        }
        reply.payloads.push_back(
            make_stub_output(service, op, msg.payloads, cm.payload_bytes(service, op)));
        net->send_after(delay_s, std::move(reply));
    }
};

// ---------------------------------------------------------------------------
// proxy actor

struct ProxyActor {
    std::string site;
    Transport* net = nullptr;
    std::shared_ptr<ExecutionTrace> trace;

    struct RunState {
        Fragment fragment;
        std::map<std::string, std::string> peers;  // party id -> endpoint
        std::string orchestrator;
        std::map<std::string, Payload> values;
        std::set<std::string> fired;
        std::map<std::uint64_t, std::string> inflight;  // correlation id -> node id
        std::map<std::string, std::vector<Message>> deferred;  // ref -> waiting requests
        bool complete_sent = false;
        bool failed = false;
    };
    std::map<std::string, RunState> runs;           // keyed by run id
    std::set<std::string> cancelled;                // tombstones
    std::map<std::string, std::vector<Message>> predispatch;  // run id -> early requests

    void on_message(const Message& msg, double now) {
        record_delivery(trace, *net, msg, now);
        switch (msg.kind) {
            case MsgKind::Dispatch: return on_dispatch(msg);
            case MsgKind::DataRequest: return on_request(msg);
            case MsgKind::DataResponse: return on_response(msg);
            case MsgKind::InvokeResult: return on_invoke_result(msg);
            case MsgKind::Cancel:
                cancelled.insert(msg.run_id);
                runs.erase(msg.run_id);
                predispatch.erase(msg.run_id);
                return;
            default: return;  // not addressed to proxies; ignore
        }
    }

    void on_dispatch(const Message& msg) {
        if (cancelled.count(msg.run_id)) return;
        RunState st;
        st.fragment = fragment_from_json(msg.body.at("fragment"));
        for (auto it = msg.body.at("peers").begin(); it != msg.body.at("peers").end(); ++it)
            st.peers[it.key()] = it.value().get<std::string>();
        st.orchestrator = msg.body.at("orchestrator").get<std::string>();
        auto [slot, inserted] = runs.emplace(msg.run_id, std::move(st));
        if (!inserted) return;  // duplicate dispatch
        RunState& run = slot->second;

        for (const auto& imp : run.fragment.imports) {
            Message req;
            req.kind = MsgKind::DataRequest;
            req.run_id = msg.run_id;
            req.from = msg.to;
            req.to = run.peers.at(imp.from);
            req.ref = imp.ref;
            net->send(std::move(req));
        }
        try_fire(msg.run_id, msg.to);

        auto early = predispatch.find(msg.run_id);
        if (early != predispatch.end()) {
            auto requests = std::move(early->second);
            predispatch.erase(early);
            for (auto& r : requests) serve_request(r);
        }
    }

    void on_request(const Message& msg) {
        if (cancelled.count(msg.run_id)) {
            respond_error(msg, "run cancelled");
            return;
        }
        if (!runs.count(msg.run_id)) {
            predispatch[msg.run_id].push_back(msg);  // dispatch still in flight
            return;
        }
        serve_request(msg);
    }

    void serve_request(const Message& msg) {
        RunState& run = runs.at(msg.run_id);
        auto ready = run.values.find(msg.ref);
        if (ready != run.values.end()) {
            Message resp;
            resp.kind = MsgKind::DataResponse;
            resp.correlation_id = msg.correlation_id;
            resp.run_id = msg.run_id;
            resp.from = msg.to;
            resp.to = msg.from;
            resp.ref = msg.ref;
            resp.payloads.push_back(ready->second);
            net->send(std::move(resp));
            return;
        }
        bool exported = std::find(run.fragment.exports.begin(), run.fragment.exports.end(),
                                  msg.ref) != run.fragment.exports.end();
        if (exported) {
            run.deferred[msg.ref].push_back(msg);
            return;
        }
        respond_error(msg, "UnknownDataRef: '" + msg.ref + "' is not exported by " +
                               run.fragment.id);
    }

    void respond_error(const Message& msg, const std::string& reason) {
        Message resp;
        resp.kind = MsgKind::DataResponse;
        resp.correlation_id = msg.correlation_id;
        resp.run_id = msg.run_id;
        resp.from = msg.to;
        resp.to = msg.from;
        resp.ref = msg.ref;
        resp.error = true;
        resp.body = {{"reason", reason}};
        net->send(std::move(resp));
    }

    void on_response(const Message& msg) {
        auto it = runs.find(msg.run_id);
        if (it == runs.end()) return;
        RunState& run = it->second;
        if (msg.error) {
            fail(msg.run_id, msg.to,
                 msg.body.value("reason", std::string("data request failed")));
            return;
        }
        if (msg.payloads.size() == 1 && !run.values.count(msg.ref)) {
            run.values[msg.ref] = msg.payloads[0];
            try_fire(msg.run_id, msg.to);
        }
    }

    void on_invoke_result(const Message& msg) {
        auto it = runs.find(msg.run_id);
        if (it == runs.end()) return;
        RunState& run = it->second;
        auto inflight = run.inflight.find(msg.correlation_id);
        if (inflight == run.inflight.end()) return;
        const std::string node_id = inflight->second;
        run.inflight.erase(inflight);
        if (msg.error) {
            fail(msg.run_id, msg.to,
                 "ServiceInvocationFailed at node '" + node_id + "': " +
                     msg.body.value("reason", std::string("unknown")));
            return;
        }
        run.values[node_id] = msg.payloads.at(0);
        run.fired.insert(node_id);

        auto waiting = run.deferred.find(node_id);
        if (waiting != run.deferred.end()) {
            auto requests = std::move(waiting->second);
            run.deferred.erase(waiting);
            for (auto& r : requests) serve_request(r);
        }
        try_fire(msg.run_id, msg.to);

        if (!run.complete_sent && run.fired.size() == run.fragment.nodes.size()) {
            run.complete_sent = true;
            Message done;
            done.kind = MsgKind::Complete;
            done.run_id = msg.run_id;
            done.from = msg.to;
            done.to = run.orchestrator;
            done.ref = run.fragment.id;
            net->send(std::move(done));
        }
    }

    // Fire every pending node whose arguments are all available. A node
    // fires at most once.
    void try_fire(const std::string& run_id, const std::string& self) {
        RunState& run = runs.at(run_id);
        if (run.failed) return;
        for (const auto& node : run.fragment.nodes) {
            if (run.fired.count(node.id)) continue;
            bool inflight = false;
            for (const auto& [corr, id] : run.inflight)
                if (id == node.id) {
                    inflight = true;
                    break;
                }
            if (inflight) continue;
            bool ready = true;
            for (const auto& arg : node.args)
                if (!run.values.count(arg)) {
                    ready = false;
                    break;
                }
            if (!ready) continue;

            Message invoke;
            invoke.kind = MsgKind::Invoke;
            invoke.run_id = run_id;
            invoke.from = self;
            invoke.to = stub_endpoint(node.service);
            invoke.ref = node.id;
            invoke.body = {{"operation", node.operation}};
            for (const auto& arg : node.args) invoke.payloads.push_back(run.values.at(arg));
            try {
                std::uint64_t corr = net->send(std::move(invoke));
                run.inflight[corr] = node.id;
            } catch (const EndpointUnknownError&) {
                fail(run_id, self, "ServiceInvocationFailed: no endpoint for service '" +
                                       node.service + "'");
                return;
            }
        }
    }

    void fail(const std::string& run_id, const std::string& self, const std::string& reason) {
        RunState& run = runs.at(run_id);
        if (run.failed) return;
        run.failed = true;
        Message cancel;
        cancel.kind = MsgKind::Cancel;
        cancel.run_id = run_id;
        cancel.from = self;
        cancel.to = run.orchestrator;
        cancel.ref = run.fragment.id;
        cancel.body = {{"reason", reason}};
        net->send(std::move(cancel));
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// installation

void install_stubs(Transport& net, const WorkflowGraph& g, const CostModel& cm,
                   const RunOptions& opts, std::shared_ptr<ExecutionTrace> trace) {
    std::map<std::string, std::shared_ptr<StubActor>> stubs;
    std::map<std::string, std::string> stub_site;
    for (const auto& n : g.nodes) {
        auto& stub = stubs[n.service];
        if (!stub) {
            stub = std::make_shared<StubActor>();
            stub->service = n.service;
            stub->cm = cm;
            stub->delay_s = opts.service_delay_s;
            stub->net = &net;
            stub->trace = trace;
            stub_site[n.service] = n.site;
        }
        stub->ops[n.operation] = static_cast<int>(n.args.size());
    }
    for (auto& [service, stub] : stubs) {
        const std::string ep = stub_endpoint(service);
        if (net.has_endpoint(ep)) continue;
        auto actor = stub;
        net.register_endpoint(ep, stub_site[service],
                              [actor](const Message& m, double now) { actor->on_message(m, now); });
    }
}

void install_proxies(Transport& net, const DeploymentPlan& plan,
                     std::shared_ptr<ExecutionTrace> trace) {
    for (const auto& f : plan.fragments) {
        const std::string ep = proxy_endpoint(f.site);
        if (net.has_endpoint(ep)) continue;
        auto actor = std::make_shared<ProxyActor>();
        actor->site = f.site;
        actor->net = &net;
        actor->trace = trace;
        net.register_endpoint(ep, f.site,
                              [actor](const Message& m, double now) { actor->on_message(m, now); });
    }
}

// ---------------------------------------------------------------------------
// orchestrator (decentralised manager)

namespace {

struct OrchState {
    std::mutex mutex;
    std::set<std::string> awaiting_outputs;
    std::set<std::string> awaiting_completes;
    std::map<std::string, Payload> outputs;
    bool failed = false;
    std::string failed_fragment;
    std::string failed_reason;
    bool cancel_broadcast = false;
    std::atomic<bool> done{false};
    double finished_at = 0;

    void check_done(double now) {
        if (done) return;
        if (failed || (awaiting_outputs.empty() && awaiting_completes.empty())) {
            finished_at = now;
            done = true;
        }
    }
};

struct EndpointGuard {
    Transport& net;
    std::string id;
    ~EndpointGuard() { net.unregister_endpoint(id); }
};

}  // namespace

RunResult orchestrate(const DeploymentPlan& plan, Payload input, Transport& net,
                      const RunOptions& opts, std::shared_ptr<ExecutionTrace> trace) {
    if (!trace) trace = std::make_shared<ExecutionTrace>();
    const std::string orch_site = !opts.orchestrator_site.empty()
                                      ? opts.orchestrator_site
                                      : plan.topology.orchestrator_site();
    if (orch_site.empty()) throw Error("orchestrate: no orchestrator site available");

    auto st = std::make_shared<OrchState>();
    std::set<std::string> distinct_outputs(plan.graph.outputs.begin(), plan.graph.outputs.end());
    for (const auto& ref : distinct_outputs)
        if (ref != kInputRef) st->awaiting_outputs.insert(ref);
    for (const auto& f : plan.fragments) st->awaiting_completes.insert(f.id);

    std::vector<std::pair<std::string, std::string>> fragment_sites;  // (id, site)
    for (const auto& f : plan.fragments) fragment_sites.emplace_back(f.id, f.site);
    auto broadcast_cancel = [&net, fragment_sites, run = opts.run_id](const std::string& reason) {
        for (const auto& [id, site] : fragment_sites) {
            Message cancel;
            cancel.kind = MsgKind::Cancel;
            cancel.run_id = run;
            cancel.from = kOrchestratorId;
            cancel.to = proxy_endpoint(site);
            cancel.ref = id;
            cancel.body = {{"reason", reason}};
            try {
                net.send(std::move(cancel));
            } catch (const Error&) {
                // fail-fast path; a dead proxy has nothing to cancel
            }
        }
    };

    net.register_endpoint(
        kOrchestratorId, orch_site,
        [st, trace, &net, input, broadcast_cancel](const Message& msg, double now) {
            record_delivery(trace, net, msg, now);
            std::lock_guard<std::mutex> lock(st->mutex);
            switch (msg.kind) {
                case MsgKind::DataRequest: {
                    Message resp;
                    resp.kind = MsgKind::DataResponse;
                    resp.correlation_id = msg.correlation_id;
                    resp.run_id = msg.run_id;
                    resp.from = msg.to;
                    resp.to = msg.from;
                    resp.ref = msg.ref;
                    if (msg.ref == kInputRef) {
                        resp.payloads.push_back(input);
                    } else {
                        resp.error = true;
                        resp.body = {{"reason",
                                      "UnknownDataRef: orchestrator owns only 'input'"}};
                    }
                    net.send(std::move(resp));
                    break;
                }
                case MsgKind::DataResponse:
                    if (msg.error) {
                        if (!st->failed) {
                            st->failed = true;
                            st->failed_fragment = msg.from;
                            st->failed_reason =
                                msg.body.value("reason", std::string("data request failed"));
                        }
                    } else if (msg.payloads.size() == 1) {
                        st->outputs[msg.ref] = msg.payloads[0];
                        st->awaiting_outputs.erase(msg.ref);
                    }
                    break;
                case MsgKind::Complete:
                    st->awaiting_completes.erase(msg.ref);
                    break;
                case MsgKind::Cancel:
                    if (!st->failed) {
                        st->failed = true;
                        st->failed_fragment = msg.ref;
                        st->failed_reason = msg.body.value("reason", std::string("cancelled"));
                    }
                    break;
                default:
                    break;
            }
            if (st->failed && !st->cancel_broadcast) {
                st->cancel_broadcast = true;
                broadcast_cancel(st->failed_reason);
            }
            st->check_done(now);
        });
    EndpointGuard guard{net, kOrchestratorId};

    // Dispatch every fragment, then request the declared outputs.
    for (const auto& f : plan.fragments) {
        nlohmann::json peers;
        for (const auto& g : plan.fragments) peers[g.id] = proxy_endpoint(g.site);
        peers[kOrchestratorId] = kOrchestratorId;
        Message dispatch;
        dispatch.kind = MsgKind::Dispatch;
        dispatch.run_id = opts.run_id;
        dispatch.from = kOrchestratorId;
        dispatch.to = proxy_endpoint(f.site);
        dispatch.ref = f.id;
        dispatch.body = {{"fragment", fragment_to_json(f)},
                         {"peers", peers},
                         {"orchestrator", kOrchestratorId}};
        try {
            net.send(std::move(dispatch));
        } catch (const EndpointUnknownError&) {
            throw ProxyUnreachableError(f.site);
        }
    }
    std::vector<std::string> output_refs;
    {
        std::lock_guard<std::mutex> lock(st->mutex);
        output_refs.assign(st->awaiting_outputs.begin(), st->awaiting_outputs.end());
    }
    for (const auto& ref : output_refs) {
        const std::string owner_site = plan.fragment_by_id(plan.owner_of(ref))->site;
        Message req;
        req.kind = MsgKind::DataRequest;
        req.run_id = opts.run_id;
        req.from = kOrchestratorId;
        req.to = proxy_endpoint(owner_site);
        req.ref = ref;
        try {
            net.send(std::move(req));
        } catch (const EndpointUnknownError&) {
            throw ProxyUnreachableError(owner_site);
        }
    }
    {
        std::lock_guard<std::mutex> lock(st->mutex);
        st->check_done(net.now());
    }

    bool finished = net.drive_until([&] { return st->done.load(); }, opts.timeout_s);

    std::lock_guard<std::mutex> lock(st->mutex);
    if (st->failed) throw FragmentFailedError(st->failed_fragment, st->failed_reason);
    if (!finished || !st->done)
        throw TimeoutError("orchestrate: workflow did not complete");

    RunResult result;
    for (const auto& ref : distinct_outputs)
        result.outputs[ref] = ref == kInputRef ? input : st->outputs.at(ref);
    trace->final_outputs = result.outputs;
    trace->makespan_s = st->finished_at;
    result.trace = trace;
    return result;
}

// ---------------------------------------------------------------------------
// centralised baseline engine

namespace {

struct EngineState {
    std::mutex mutex;
    WorkflowGraph graph;
    std::vector<std::vector<std::string>> layers;
    size_t next_layer = 0;
    std::set<std::string> outstanding;
    std::map<std::string, Payload> values;
    bool failed = false;
    std::string failed_reason;
    std::atomic<bool> done{false};
    double finished_at = 0;
};

}  // namespace

RunResult centralised_execute(const WorkflowGraph& g, Payload input, Transport& net,
                              const RunOptions& opts, std::shared_ptr<ExecutionTrace> trace) {
    if (!trace) trace = std::make_shared<ExecutionTrace>();
    if (opts.orchestrator_site.empty())
        throw Error("centralised_execute: opts.orchestrator_site is required");

    auto st = std::make_shared<EngineState>();
    st->graph = g;
    st->layers = stages(g);
    st->values[kInputRef] = input;

    auto fire_layer = [st, &net, run = opts.run_id](size_t k) {
        for (const auto& id : st->layers[k]) {
            const InvocationNode* n = st->graph.find(id);
            Message invoke;
            invoke.kind = MsgKind::Invoke;
            invoke.run_id = run;
            invoke.from = kOrchestratorId;
            invoke.to = stub_endpoint(n->service);
            invoke.ref = n->id;
            invoke.body = {{"operation", n->operation}};
            for (const auto& arg : n->args) invoke.payloads.push_back(st->values.at(arg));
            st->outstanding.insert(n->id);
            try {
                net.send(std::move(invoke));
            } catch (const EndpointUnknownError&) {
                throw ServiceUnreachableError(n->service);
            }
        }
    };

    net.register_endpoint(
        kOrchestratorId, opts.orchestrator_site,
        [st, trace, &net, fire_layer](const Message& msg, double now) {
            record_delivery(trace, net, msg, now);
            std::lock_guard<std::mutex> lock(st->mutex);
            if (msg.kind != MsgKind::InvokeResult || st->done) return;
            if (msg.error) {
                st->failed = true;
                st->failed_reason = msg.body.value("reason", std::string("invoke failed"));
                st->finished_at = now;
                st->done = true;
                return;
            }
            st->values[msg.ref] = msg.payloads.at(0);
            st->outstanding.erase(msg.ref);
            if (!st->outstanding.empty()) return;
            ++st->next_layer;
            if (st->next_layer < st->layers.size()) {
                try {
                    fire_layer(st->next_layer);
                } catch (const Error& e) {
                    st->failed = true;
                    st->failed_reason = e.what();
                    st->finished_at = now;
                    st->done = true;
                }
            } else {
                st->finished_at = now;
                st->done = true;
            }
        });
    EndpointGuard guard{net, kOrchestratorId};

    {
        std::lock_guard<std::mutex> lock(st->mutex);
        if (st->layers.empty()) {
            st->finished_at = net.now();
            st->done = true;
        } else {
            fire_layer(0);
        }
    }

    bool finished = net.drive_until([&] { return st->done.load(); }, opts.timeout_s);

    std::lock_guard<std::mutex> lock(st->mutex);
    if (st->failed) {
        if (st->failed_reason.rfind("service unreachable", 0) == 0)
            throw ServiceUnreachableError(st->failed_reason);
        throw FragmentFailedError("engine", st->failed_reason);
    }
    if (!finished || !st->done)
        throw TimeoutError("centralised_execute: workflow did not complete");

    RunResult result;
    std::set<std::string> distinct_outputs(g.outputs.begin(), g.outputs.end());
    for (const auto& ref : distinct_outputs) result.outputs[ref] = st->values.at(ref);
    trace->final_outputs = result.outputs;
    trace->makespan_s = st->finished_at;
    result.trace = trace;
    return result;
}

}  // namespace dflow
