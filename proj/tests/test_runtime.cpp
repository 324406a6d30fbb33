#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "dflow/bench.hpp"
#include "dflow/runtime.hpp"
#include "dflow/sim_transport.hpp"
#include "dflow/socket_transport.hpp"
#include "testutil.hpp"

using namespace dflow;
namespace tu = dflow::testutil;

namespace {

constexpr std::uint64_t MB = 1024 * 1024;

struct SimRun {
    WorkflowGraph graph;
    DeploymentPlan plan;
    std::shared_ptr<ExecutionTrace> trace;
    RunResult result;
};

Topology numbered_sites(int n) { return Topology::uniform(n); }

SimRun run_decentralised(const std::string& source, const CostModel& cm, const Topology& topo,
                         const RunOptions& base = {}) {
    SimRun out;
    out.graph = build_graph(tu::must_check(source), cm);
    out.plan = partition(out.graph, topo);
    SimTransport net(topo, cm.control_overhead_bytes);
    out.trace = std::make_shared<ExecutionTrace>();
    RunOptions opts = base;
    opts.orchestrator_site = topo.orchestrator_site();
    install_stubs(net, out.graph, cm, opts, out.trace);
    install_proxies(net, out.plan, out.trace);
    Payload input = make_input_payload(cm.input_bytes, opts.seed);
    out.result = orchestrate(out.plan, input, net, opts, out.trace);
    return out;
}

SimRun run_centralised(const std::string& source, const CostModel& cm, const Topology& topo,
                       const RunOptions& base = {}) {
    SimRun out;
    out.graph = build_graph(tu::must_check(source), cm);
    out.plan = partition(out.graph, topo);
    SimTransport net(topo, cm.control_overhead_bytes);
    out.trace = std::make_shared<ExecutionTrace>();
    RunOptions opts = base;
    opts.orchestrator_site = topo.orchestrator_site();
    install_stubs(net, out.graph, cm, opts, out.trace);
    Payload input = make_input_payload(cm.input_bytes, opts.seed);
    out.result = centralised_execute(out.graph, input, net, opts, out.trace);
    return out;
}

bool outputs_identical(const std::map<std::string, Payload>& a,
                       const std::map<std::string, Payload>& b) {
    if (a.size() != b.size()) return false;
    for (const auto& [ref, pa] : a) {
        auto it = b.find(ref);
        if (it == b.end()) return false;
        if (!pa || !it->second) return false;
        if (*pa != *it->second) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("orchestrate: pipeline message census") {
    CostModel cm = CostModel::uniform(10 * MB, 10 * MB, 512);
    SimRun run = run_decentralised(tu::kPipeline3, cm, numbered_sites(3));

    CHECK(run.trace->count(MsgKind::Dispatch) == 3);
    CHECK(run.trace->count(MsgKind::Complete) == 3);
    CHECK(run.trace->count(MsgKind::DataRequest) == 4);  // 3 imports + 1 output pull

    int input_delivery = 0, inter_proxy = 0, output_retrieval = 0;
    for (const auto& e : run.trace->events()) {
        if (e.kind != MsgKind::DataResponse) continue;
        if (e.from == kOrchestratorId) ++input_delivery;
        else if (e.to == kOrchestratorId) ++output_retrieval;
        else ++inter_proxy;
    }
    CHECK(input_delivery == 1);
    CHECK(inter_proxy == 2);
    CHECK(output_retrieval == 1);

    // Local invocations are traced but cost no WAN bytes.
    CHECK(run.trace->count(MsgKind::Invoke) == 3);
    CHECK(run.trace->count(MsgKind::Invoke, /*inter_site_only=*/true) == 0);

    REQUIRE(run.result.outputs.count("x3"));
    CHECK(run.result.outputs.at("x3")->size() == 10 * MB);
}

TEST_CASE("orchestrate: all services at the orchestrator site move zero inter-site bytes") {
    const char* src =
        "workflow W {\n"
        "  service A at s0 { f/1 }\n"
        "  service B at s0 { g/1 }\n"
        "  x = A.f(input)\n"
        "  y = B.g(x)\n"
        "  outputs y\n"
        "}\n";
    CostModel cm = CostModel::uniform(MB, MB, 512);
    SimRun run = run_decentralised(src, cm, numbered_sites(1));
    CHECK(run.trace->wan_total_bytes() == 0);
    CHECK(run.trace->wan_payload_bytes() == 0);
    CHECK(run.result.outputs.at("y")->size() == MB);
    CHECK(run.trace->makespan_s == 0.0);  // intra-site links are instantaneous
}

TEST_CASE("orchestrate: dead proxy surfaces ProxyUnreachable, no partial results") {
    CostModel cm = CostModel::uniform(1024, 1024, 64);
    WorkflowGraph g = build_graph(tu::must_check(tu::kPipeline3), cm);
    Topology topo = numbered_sites(3);
    DeploymentPlan plan = partition(g, topo);
    SimTransport net(topo, 64);
    auto trace = std::make_shared<ExecutionTrace>();
    RunOptions opts;
    opts.orchestrator_site = "s0";
    install_stubs(net, g, cm, opts, trace);
    install_proxies(net, plan, trace);
    net.unregister_endpoint(proxy_endpoint("s2"));

    try {
        orchestrate(plan, make_input_payload(1024, 1), net, opts, trace);
        FAIL("expected ProxyUnreachableError");
    } catch (const ProxyUnreachableError& e) {
        CHECK(e.site == "s2");
    }
}

TEST_CASE("proxy: two independent nodes both fire, order-free") {
    const char* src =
        "workflow W {\n"
        "  service A at s1 { f/1, g/1 }\n"
        "  a = A.f(input)\n"
        "  b = A.g(input)\n"
        "  outputs a, b\n"
        "}\n";
    CostModel cm = CostModel::uniform(2048, 1024, 64);
    SimRun run = run_decentralised(src, cm, numbered_sites(1));
    CHECK(run.trace->count(MsgKind::Invoke) == 2);
    CHECK(run.trace->count(MsgKind::InvokeResult) == 2);
    CHECK(run.result.outputs.at("a")->size() == 2048);
    CHECK(run.result.outputs.at("b")->size() == 2048);
    // Two outputs but one input import: input requested exactly once.
    int input_responses = 0;
    for (const auto& e : run.trace->events())
        if (e.kind == MsgKind::DataResponse && e.from == kOrchestratorId) ++input_responses;
    CHECK(input_responses == 1);
}

TEST_CASE("proxy: import request precedes the dependent invoke") {
    CostModel cm = CostModel::uniform(4096, 4096, 64);
    SimRun run = run_decentralised(tu::kPipeline3, cm, numbered_sites(3));
    const auto& events = run.trace->events();

    auto request_x1 = std::find_if(events.begin(), events.end(), [](const TraceEvent& e) {
        return e.kind == MsgKind::DataRequest && e.ref == "x1" && e.from == proxy_endpoint("s2");
    });
    auto invoke_x2 = std::find_if(events.begin(), events.end(), [](const TraceEvent& e) {
        return e.kind == MsgKind::Invoke && e.ref == "x2";
    });
    REQUIRE(request_x1 != events.end());
    REQUIRE(invoke_x2 != events.end());
    CHECK(request_x1->t <= invoke_x2->t);
    CHECK(request_x1 < invoke_x2);
}

TEST_CASE("proxy: request for a never-exported ref fails the fragment") {
    CostModel cm = CostModel::uniform(1024, 1024, 64);
    WorkflowGraph g = build_graph(tu::must_check(tu::kPipeline3), cm);
    Topology topo = numbered_sites(3);
    DeploymentPlan plan = partition(g, topo);
    // Corrupt s2's fragment: import a ref s1 never exports.
    for (auto& f : plan.fragments)
        for (auto& imp : f.imports)
            if (imp.ref == "x1") imp.ref = "ghost";
    for (auto& f : plan.fragments)
        for (auto& n : f.nodes)
            for (auto& a : n.args)
                if (a == "x1") a = "ghost";

    SimTransport net(topo, 64);
    auto trace = std::make_shared<ExecutionTrace>();
    RunOptions opts;
    opts.orchestrator_site = "s0";
    install_stubs(net, g, cm, opts, trace);
    install_proxies(net, plan, trace);
    try {
        orchestrate(plan, make_input_payload(1024, 1), net, opts, trace);
        FAIL("expected FragmentFailedError");
    } catch (const FragmentFailedError& e) {
        CHECK(e.reason.find("UnknownDataRef") != std::string::npos);
    }
}

TEST_CASE("centralised: pipeline trace totals 60 MB and matches the estimate exactly") {
    CostModel cm = CostModel::uniform(10 * MB, 10 * MB, 0);
    SimRun run = run_centralised(tu::kPipeline3, cm, numbered_sites(3));
    CHECK(run.trace->wan_total_bytes() == 60 * MB);
    CHECK(run.trace->wan_payload_bytes() == 60 * MB);

    CostEstimate est = estimate_cost(run.plan, cm, ExecMode::Centralised);
    CHECK(est.total_bytes == run.trace->wan_total_bytes());
    CHECK(est.payload_bytes == run.trace->wan_payload_bytes());
    CHECK(est.makespan_s == run.trace->makespan_s);
}

TEST_CASE("centralised == decentralised bytes when the lone service is local") {
    const char* src = "workflow W { service A at s0 { f/1 } x = A.f(input) outputs x }";
    CostModel cm = CostModel::uniform(MB, MB, 512);
    SimRun cen = run_centralised(src, cm, numbered_sites(1));
    SimRun dec = run_decentralised(src, cm, numbered_sites(1));
    CHECK(cen.trace->wan_total_bytes() == dec.trace->wan_total_bytes());
    CHECK(cen.trace->wan_total_bytes() == 0);
    CHECK(outputs_identical(cen.result.outputs, dec.result.outputs));
}

TEST_CASE("centralised: stage two starts only after every stage-one result returned") {
    CostModel cm = CostModel::uniform(MB, MB, 256);
    SimRun run = run_centralised(tu::kAggregation3, cm, numbered_sites(4));
    const auto& events = run.trace->events();

    double last_stage1_result = 0;
    double agg_invoke = -1;
    for (const auto& e : events) {
        if (e.kind == MsgKind::InvokeResult && e.ref != "y")
            last_stage1_result = std::max(last_stage1_result, e.t);
        if (e.kind == MsgKind::Invoke && e.ref == "y") agg_invoke = e.t;
    }
    REQUIRE(agg_invoke >= 0);
    CHECK(agg_invoke >= last_stage1_result);
}

TEST_CASE("stub: payload size, delay, determinism, arity errors") {
    const char* src = "workflow W { service A at s1 { f/1 } x = A.f(input) outputs x }";
    CostModel cm = CostModel::uniform(10 * MB, 10 * MB, 0);
    WorkflowGraph g = build_graph(tu::must_check(src), cm);
    Topology topo = numbered_sites(1);
    SimTransport net(topo, 0);
    RunOptions opts;
    opts.service_delay_s = 0.5;
    install_stubs(net, g, cm, opts, nullptr);

    struct Got {
        std::vector<Message> results;
        std::vector<double> times;
    } got;
    net.register_endpoint("tester", "s1", [&](const Message& m, double t) {
        got.results.push_back(m);
        got.times.push_back(t);
    });

    auto invoke = [&](std::vector<Payload> args) {
        Message m;
        m.kind = MsgKind::Invoke;
        m.from = "tester";
        m.to = stub_endpoint("A");
        m.ref = "x";
        m.body = {{"operation", "f"}};
        m.payloads = std::move(args);
        net.send(std::move(m));
        net.run_until_idle();
    };

    Payload blob = make_input_payload(10 * MB, 3);
    invoke({blob});
    REQUIRE(got.results.size() == 1);
    CHECK_FALSE(got.results[0].error);
    CHECK(got.results[0].payloads.at(0)->size() == 10 * MB);
    CHECK(got.times[0] >= 0.5);  // processing delay honored on the virtual clock

    invoke({blob});  // identical invoke, byte-identical result
    REQUIRE(got.results.size() == 2);
    CHECK(*got.results[1].payloads.at(0) == *got.results[0].payloads.at(0));

    invoke({blob, blob});  // wrong arity
    REQUIRE(got.results.size() == 3);
    CHECK(got.results[2].error);
    CHECK(got.results[2].body.value("reason", std::string{}).find("protocol error") !=
          std::string::npos);
}

TEST_CASE("no hub transit: intermediate data never flows through the orchestrator") {
    for (const char* src : {tu::kPipeline3, tu::kAggregation3, tu::kComposite}) {
        CostModel cm = CostModel::uniform(MB, MB, 128);
        SimRun run = run_decentralised(src, cm, numbered_sites(4));
        std::set<std::string> outputs(run.graph.outputs.begin(), run.graph.outputs.end());
        for (const auto& e : run.trace->events()) {
            if (e.kind != MsgKind::DataResponse) continue;
            if (e.from == kOrchestratorId) CHECK(e.ref == "input");
            if (e.to == kOrchestratorId) CHECK(outputs.count(e.ref));
        }
    }
}

TEST_CASE("trace conservation: decentralised estimate equals the trace exactly") {
    for (const char* src : {tu::kPipeline3, tu::kAggregation3, tu::kComposite}) {
        for (std::uint64_t envelope : {std::uint64_t(0), std::uint64_t(512)}) {
            CostModel cm = CostModel::uniform(3 * MB, MB, envelope);
            SimRun run = run_decentralised(src, cm, numbered_sites(4));
            CostEstimate est = estimate_cost(run.plan, cm, ExecMode::Decentralised);
            CHECK(est.payload_bytes == run.trace->wan_payload_bytes());
            CHECK(est.total_bytes == run.trace->wan_total_bytes());
        }
    }
}

TEST_CASE("makespan: simulated run equals the analytic critical path exactly") {
    // Pipeline over uniform default links.
    CostModel cm = CostModel::uniform(MB, MB, 512);
    SimRun pipe = run_decentralised(tu::kPipeline3, cm, numbered_sites(3));
    CostEstimate est = estimate_cost(pipe.plan, cm, ExecMode::Decentralised);
    CHECK(est.makespan_s == pipe.trace->makespan_s);

    // The same equality holds for the fan patterns and with a service delay.
    RunOptions delayed;
    delayed.service_delay_s = 0.25;
    for (auto pattern : {Pattern::Aggregation, Pattern::Distribution}) {
        std::string src = gen_workflow_source(pattern, 4);
        SimRun run = run_decentralised(src, cm, numbered_sites(5), delayed);
        CostEstimate e = estimate_cost(run.plan, cm, ExecMode::Decentralised, 0.25);
        CHECK(e.makespan_s == run.trace->makespan_s);

        SimRun cen = run_centralised(src, cm, numbered_sites(5), delayed);
        CostEstimate ec = estimate_cost(cen.plan, cm, ExecMode::Centralised, 0.25);
        CHECK(ec.makespan_s == cen.trace->makespan_s);
    }
}

TEST_CASE("result equivalence: both modes agree on randomized workflows") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto rw = tu::random_workflow(seed, 10, 4);
        WorkflowSpec spec = tu::must_parse(rw.source);
        CostModel cm = tu::random_cost_model_for(spec, seed, 64);
        Topology topo = tu::random_topology(seed, rw.n_sites);
        RunOptions opts;
        opts.seed = seed;

        SimRun dec = run_decentralised(rw.source, cm, topo, opts);
        SimRun cen = run_centralised(rw.source, cm, topo, opts);
        CHECK(outputs_identical(dec.result.outputs, cen.result.outputs));

        // Single fire: every node appears exactly once as an Invoke.
        for (const SimRun* run : {&dec, &cen}) {
            std::map<std::string, int> invokes;
            for (const auto& e : run->trace->events())
                if (e.kind == MsgKind::Invoke) invokes[e.ref]++;
            CHECK(invokes.size() == run->graph.nodes.size());
            for (const auto& [id, count] : invokes) CHECK(count == 1);
        }

        // Conservation on every random topology and size mix.
        CostEstimate est = estimate_cost(dec.plan, cm, ExecMode::Decentralised);
        CHECK(est.payload_bytes == dec.trace->wan_payload_bytes());
        CHECK(est.total_bytes == dec.trace->wan_total_bytes());
    }
}

TEST_CASE("metrics conservation: per-link counters reconcile with the trace") {
    CostModel cm = CostModel::uniform(MB, MB, 512);
    WorkflowGraph g = build_graph(tu::must_check(tu::kComposite), cm);
    Topology topo = numbered_sites(3);
    DeploymentPlan plan = partition(g, topo);
    SimTransport net(topo, 512);
    auto trace = std::make_shared<ExecutionTrace>();
    RunOptions opts;
    opts.orchestrator_site = "s0";
    install_stubs(net, g, cm, opts, trace);
    install_proxies(net, plan, trace);
    orchestrate(plan, make_input_payload(MB, 1), net, opts, trace);

    CHECK(net.metrics().sent_bytes == net.metrics().received_bytes);
    CHECK(net.metrics().sent_bytes == trace->total_bytes());
    CHECK(net.metrics().inter_site_bytes == trace->wan_total_bytes());
    std::uint64_t per_link_sum = 0;
    for (const auto& [link, counter] : net.metrics().per_site_link)
        per_link_sum += counter.bytes;
    CHECK(per_link_sum == trace->total_bytes());
}

TEST_CASE("determinism: same seed, same trace, twice") {
    CostModel cm = CostModel::uniform(MB, MB, 512);
    SimRun a = run_decentralised(tu::kComposite, cm, numbered_sites(3));
    SimRun b = run_decentralised(tu::kComposite, cm, numbered_sites(3));
    REQUIRE(a.trace->events().size() == b.trace->events().size());
    for (size_t i = 0; i < a.trace->events().size(); ++i) {
        const auto& x = a.trace->events()[i];
        const auto& y = b.trace->events()[i];
        CHECK(x.t == y.t);
        CHECK(x.from == y.from);
        CHECK(x.to == y.to);
        CHECK(x.kind == y.kind);
        CHECK(x.total_bytes == y.total_bytes);
        CHECK(x.correlation_id == y.correlation_id);
    }
    CHECK(a.trace->makespan_s == b.trace->makespan_s);
}

TEST_CASE("simulated and socket transports agree on outputs and payload bytes") {
    for (const char* src : {tu::kPipeline3, tu::kAggregation3}) {
        CostModel cm = CostModel::uniform(64 * 1024, 32 * 1024, 128);
        Topology topo = numbered_sites(4);
        SimRun sim = run_decentralised(src, cm, topo);

        WorkflowGraph g = build_graph(tu::must_check(src), cm);
        DeploymentPlan plan = partition(g, topo);
        SocketTransport net(cm.control_overhead_bytes);
        auto trace = std::make_shared<ExecutionTrace>();
        RunOptions opts;
        opts.orchestrator_site = "s0";
        opts.timeout_s = 30.0;
        install_stubs(net, g, cm, opts, trace);
        install_proxies(net, plan, trace);
        RunResult result = orchestrate(plan, make_input_payload(cm.input_bytes, opts.seed), net,
                                       opts, trace);
        CHECK(outputs_identical(result.outputs, sim.result.outputs));
        CHECK(trace->wan_payload_bytes() == sim.trace->wan_payload_bytes());
        CHECK(trace->wan_total_bytes() == sim.trace->wan_total_bytes());
        net.shutdown();
    }
}
