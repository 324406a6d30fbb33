#pragma once

#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dflow/check.hpp"
#include "dflow/cost.hpp"
#include "dflow/graph.hpp"
#include "dflow/parse.hpp"
#include "dflow/topology.hpp"

namespace dflow::testutil {

inline const char* kPipeline3 = R"(
workflow pipe3 {
  service A at s1 { f/1 }
  service B at s2 { g/1 }
  service C at s3 { h/1 }
  x1 = A.f(input)
  x2 = B.g(x1)
  x3 = C.h(x2)
  outputs x3
}
)";

inline const char* kAggregation3 = R"(
workflow agg3 {
  service A1 at s1 { f/1 }
  service A2 at s2 { f/1 }
  service A3 at s3 { f/1 }
  service B at s4 { agg/3 }
  x1 = A1.f(input)
  x2 = A2.f(input)
  x3 = A3.f(input)
  y = B.agg(x1, x2, x3)
  outputs y
}
)";

// A.split fans out to B1/B2, whose results C.h aggregates.
inline const char* kComposite = R"(
workflow composite {
  service A at s1 { split/1 }
  service B1 at s2 { g/1 }
  service B2 at s3 { g/1 }
  service C at s1 { h/2 }
  x = A.split(input)
  y1 = B1.g(x)
  y2 = B2.g(x)
  z = C.h(y1, y2)
  outputs z
}
)";

inline WorkflowSpec must_parse(const std::string& source) {
    ParseResult r = parse(source);
    if (!r.ok()) {
        std::ostringstream msg;
        msg << "fixture does not parse:";
        for (const auto& d : r.diagnostics) msg << "\n  " << format_diagnostic("<fixture>", d);
        throw std::runtime_error(msg.str());
    }
    return *r.spec;
}

inline CheckedWorkflow must_check(const std::string& source) {
    CheckResult r = check(must_parse(source));
    if (!r.ok()) {
        std::ostringstream msg;
        msg << "fixture does not check:";
        for (const auto& d : r.diagnostics) msg << "\n  " << format_diagnostic("<fixture>", d);
        throw std::runtime_error(msg.str());
    }
    return *r.checked;
}

// Random workflow whose shape covers the DAG space: every binding consumes
// only earlier targets or input, services get random sites, sinks become the
// outputs. Deterministic per seed.
struct RandomWorkflow {
    std::string source;
    int n_nodes = 0;
    int n_sites = 0;
};

inline RandomWorkflow random_workflow(std::uint64_t seed, int max_nodes = 12, int max_sites = 4) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) {
        return static_cast<int>(lo + rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };
    const int nodes = pick(1, max_nodes);
    const int sites = pick(1, max_sites);

    std::ostringstream out;
    out << "workflow rnd" << seed % 100000 << " {\n";
    std::vector<int> arity(static_cast<size_t>(nodes));
    for (int i = 1; i <= nodes; ++i) {
        int max_args = std::min(3, i);  // earlier targets plus input
        arity[static_cast<size_t>(i - 1)] = pick(0, max_args);
        out << "  service S" << i << " at s" << pick(1, sites) << " { op" << i << "/"
            << arity[static_cast<size_t>(i - 1)] << " }\n";
    }
    std::set<std::string> consumed;
    for (int i = 1; i <= nodes; ++i) {
        out << "  v" << i << " = S" << i << ".op" << i << "(";
        for (int a = 0; a < arity[static_cast<size_t>(i - 1)]; ++a) {
            if (a) out << ", ";
            int src = pick(0, i - 1);  // 0 = input
            if (src == 0) {
                out << "input";
            } else {
                out << "v" << src;
                consumed.insert("v" + std::to_string(src));
            }
        }
        out << ")\n";
    }
    out << "  outputs ";
    bool first = true;
    for (int i = 1; i <= nodes; ++i) {
        std::string v = "v" + std::to_string(i);
        if (!consumed.count(v)) {
            out << (first ? "" : ", ") << v;
            first = false;
        }
    }
    out << "\n}\n";
    return {out.str(), nodes, sites};
}

inline Topology random_topology(std::uint64_t seed, int sites) {
    std::mt19937_64 rng(seed);
    Topology t;
    t.add_site("s0");
    for (int i = 1; i <= sites; ++i) t.add_site("s" + std::to_string(i));
    std::uniform_real_distribution<double> lat(0.005, 0.1);
    std::uniform_real_distribution<double> bw(1.0 * 1024 * 1024, 20.0 * 1024 * 1024);
    for (int i = 0; i <= sites; ++i)
        for (int j = 0; j <= sites; ++j) {
            if (i == j) continue;
            t.add_link("s" + std::to_string(i), "s" + std::to_string(j), lat(rng), bw(rng));
        }
    return t;
}

inline CostModel random_cost_model(std::uint64_t seed, std::uint64_t envelope = 64) {
    std::mt19937_64 rng(seed);
    CostModel cm;
    cm.set_default_size(1 + rng() % 65536);
    cm.input_bytes = 1 + rng() % 65536;
    cm.control_overhead_bytes = envelope;
    return cm;
}

// Distinct random output size per (service, operation).
inline CostModel random_cost_model_for(const WorkflowSpec& spec, std::uint64_t seed,
                                       std::uint64_t envelope = 64) {
    std::mt19937_64 rng(seed);
    CostModel cm;
    cm.input_bytes = 1 + rng() % 65536;
    cm.control_overhead_bytes = envelope;
    for (const auto& svc : spec.services)
        for (const auto& op : svc.operations) cm.set_size(svc.name, op.name, 1 + rng() % 65536);
    return cm;
}

}  // namespace dflow::testutil
