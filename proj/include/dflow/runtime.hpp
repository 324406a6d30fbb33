#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dflow/cost.hpp"
#include "dflow/graph.hpp"
#include "dflow/message.hpp"
#include "dflow/partition.hpp"
#include "dflow/transport.hpp"

namespace dflow {

struct TraceEvent {
    double t = 0;
    std::string from;
    std::string to;
    MsgKind kind = MsgKind::Cancel;
    std::uint64_t payload_bytes = 0;
    std::uint64_t total_bytes = 0;  // envelope + payload
    std::uint64_t correlation_id = 0;
    std::string ref;
    bool inter_site = false;
};

// Ordered record of every delivered message plus the run's outcome.
class ExecutionTrace {
  public:
    void record(const TraceEvent& ev);
    const std::vector<TraceEvent>& events() const { return events_; }

    std::uint64_t total_bytes() const;      // every event, local included
    std::uint64_t wan_total_bytes() const;  // inter-site events only
    // Inter-site payload bytes over DataResponse/Invoke/InvokeResult events.
    std::uint64_t wan_payload_bytes() const;
    std::uint64_t count(MsgKind kind, bool inter_site_only = false) const;

    double makespan_s = 0;
    std::map<std::string, Payload> final_outputs;

  private:
    std::vector<TraceEvent> events_;
    mutable std::mutex mutex_;
};

struct RunOptions {
    std::string run_id = "run-1";
    std::uint64_t seed = 1;
    double service_delay_s = 0.0;
    double timeout_s = 60.0;              // socket-transport watchdog
    std::string orchestrator_site;        // empty: derive from the plan topology
};

struct RunResult {
    std::map<std::string, Payload> outputs;
    std::shared_ptr<ExecutionTrace> trace;
};

// Deterministic payload generators: identical inputs give identical bytes.
Payload make_input_payload(std::uint64_t size, std::uint64_t seed);
Payload make_stub_output(const std::string& service, const std::string& op,
                         const std::vector<Payload>& args, std::uint64_t size);

// Registers one stub service actor per service in the graph at endpoint
// "svc:<name>". Stubs answer Invoke with a deterministic payload of the
// cost-model size after the configured processing delay. Pass the same trace
// to every install_* call and to the run so the record is complete.
void install_stubs(Transport& net, const WorkflowGraph& g, const CostModel& cm,
                   const RunOptions& opts, std::shared_ptr<ExecutionTrace> trace);

// Registers one proxy actor per fragment site at endpoint "proxy:<site>".
// Proxies execute dispatched fragments with data-driven firing and serve
// peer data requests (pull model). Already-registered sites are kept: one
// proxy per site serves any number of runs, keyed by run id.
void install_proxies(Transport& net, const DeploymentPlan& plan,
                     std::shared_ptr<ExecutionTrace> trace);

// Decentralised run: dispatches fragments to proxies, serves the workflow
// input, collects Complete notices and the declared outputs.
// Requires install_proxies + install_stubs first.
// Throws ProxyUnreachableError / FragmentFailedError / TimeoutError.
RunResult orchestrate(const DeploymentPlan& plan, Payload input, Transport& net,
                      const RunOptions& opts = {},
                      std::shared_ptr<ExecutionTrace> trace = nullptr);

// Centralised baseline: the engine walks the stages; every argument and
// every result transits the engine. Stage k+1 starts only after all stage-k
// results returned. Requires install_stubs first and an explicit
// opts.orchestrator_site (the engine's location).
RunResult centralised_execute(const WorkflowGraph& g, Payload input, Transport& net,
                              const RunOptions& opts = {},
                              std::shared_ptr<ExecutionTrace> trace = nullptr);

std::string proxy_endpoint(const std::string& site);
std::string stub_endpoint(const std::string& service);

}  // namespace dflow
