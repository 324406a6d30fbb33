// Benchmark harness: generates pattern workloads, runs centralised and
// decentralised configurations on the simulated transport, and reports the
// communicated bytes and makespan per cell.

#include "dflow/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dflow/errors.hpp"
#include "dflow/parse.hpp"
#include "dflow/runtime.hpp"
#include "dflow/sim_transport.hpp"

namespace dflow {

const char* to_string(Pattern p) {
    switch (p) {
        case Pattern::Pipeline: return "pipeline";
        case Pattern::Aggregation: return "aggregation";
        case Pattern::Distribution: return "distribution";
        case Pattern::File: return "file";
    }
    return "?";
}

std::optional<Pattern> pattern_from_string(const std::string& s) {
    if (s == "pipeline") return Pattern::Pipeline;
    if (s == "aggregation") return Pattern::Aggregation;
    if (s == "distribution") return Pattern::Distribution;
    if (s.rfind("file:", 0) == 0 || s == "file") return Pattern::File;
    return std::nullopt;
}

std::string gen_workflow_source(Pattern pattern, int n) {
    std::ostringstream out;
    switch (pattern) {
        case Pattern::Pipeline: {
            if (n < 1) throw Error("pipeline needs n >= 1");
            out << "workflow pipeline_" << n << " {\n";
            for (int i = 1; i <= n; ++i)
                out << "  service S" << i << " at s" << i << " { f/1 }\n";
            for (int i = 1; i <= n; ++i)
                out << "  x" << i << " = S" << i << ".f("
                    << (i == 1 ? std::string(kInputRef) : "x" + std::to_string(i - 1)) << ")\n";
            out << "  outputs x" << n << "\n}\n";
            break;
        }
        case Pattern::Aggregation: {
            if (n < 2) throw Error("aggregation needs n >= 2");
            out << "workflow aggregation_" << n << " {\n";
            for (int i = 1; i <= n; ++i)
                out << "  service P" << i << " at s" << i << " { f/1 }\n";
            out << "  service AGG at s" << n + 1 << " { agg/" << n << " }\n";
            for (int i = 1; i <= n; ++i)
                out << "  x" << i << " = P" << i << ".f(input)\n";
            out << "  y = AGG.agg(";
            for (int i = 1; i <= n; ++i) out << (i > 1 ? ", " : "") << "x" << i;
            out << ")\n  outputs y\n}\n";
            break;
        }
        case Pattern::Distribution: {
            if (n < 2) throw Error("distribution needs n >= 2");
            out << "workflow distribution_" << n << " {\n";
            out << "  service D at s1 { split/1 }\n";
            for (int i = 1; i <= n; ++i)
                out << "  service C" << i << " at s" << i + 1 << " { g/1 }\n";
            out << "  x = D.split(input)\n";
            for (int i = 1; i <= n; ++i)
                out << "  y" << i << " = C" << i << ".g(x)\n";
            out << "  outputs ";
            for (int i = 1; i <= n; ++i) out << (i > 1 ? ", " : "") << "y" << i;
            out << "\n}\n";
            break;
        }
        case Pattern::File:
            throw Error("gen does not apply to file workloads");
    }
    return out.str();
}

void ExperimentConfig::validate() const {
    if (pattern == Pattern::Pipeline && n < 1) throw Error("bench: pipeline needs n >= 1");
    if ((pattern == Pattern::Aggregation || pattern == Pattern::Distribution) && n < 2)
        throw Error("bench: fan patterns need n >= 2");
    if (pattern == Pattern::File && file.empty()) throw Error("bench: file pattern needs a path");
    if (payloads.empty()) throw Error("bench: at least one payload size required");
    for (auto p : payloads)
        if (p == 0) throw Error("bench: payload sizes must be positive");
    if (repetitions < 1) throw Error("bench: repetitions must be >= 1");
}

namespace {

struct Workload {
    std::string label;
    WorkflowGraph graph_template;  // sizes filled per cell
    CheckedWorkflow checked;
    Topology topology;
};

CheckedWorkflow compile(const std::string& source) {
    ParseResult parsed = parse(source);
    if (!parsed.ok()) {
        std::string msg = "workload does not parse:";
        for (const auto& d : parsed.diagnostics) msg += "\n  " + format_diagnostic("<gen>", d);
        throw Error(msg);
    }
    CheckResult checked = check(*parsed.spec);
    if (!checked.ok()) {
        std::string msg = "workload does not check:";
        for (const auto& d : checked.diagnostics) msg += "\n  " + format_diagnostic("<gen>", d);
        throw Error(msg);
    }
    return *checked.checked;
}

Topology topology_for(const ExperimentConfig& config, const WorkflowSpec& spec) {
    if (config.topology_file) return Topology::load_file(*config.topology_file);
    // s0 hosts the orchestrator; every service site follows in sorted order.
    Topology t;
    t.add_site("s0");
    std::set<std::string> sites;
    for (const auto& svc : spec.services) sites.insert(svc.site);
    for (const auto& s : sites) t.add_site(s);
    return t;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();

    std::string source;
    std::string label;
    if (config.pattern == Pattern::File) {
        std::ifstream in(config.file);
        if (!in) throw Error("cannot open workflow file: " + config.file);
        std::stringstream buf;
        buf << in.rdbuf();
        source = buf.str();
        label = std::filesystem::path(config.file).stem().string();
    } else {
        source = gen_workflow_source(config.pattern, config.n);
        label = to_string(config.pattern);
    }

    CheckedWorkflow checked = compile(source);
    Topology topo = topology_for(config, checked.spec());

    ExperimentReport report;
    for (std::uint64_t payload : config.payloads) {
        CostModel cm = CostModel::uniform(payload, payload, config.envelope_bytes);
        WorkflowGraph graph = build_graph(checked, cm);
        DeploymentPlan plan = partition(graph, topo);

        RunOptions opts;
        opts.seed = config.seed;
        opts.service_delay_s = config.service_delay_s;
        opts.orchestrator_site = topo.orchestrator_site();
        Payload input = make_input_payload(cm.input_bytes, config.seed);

        for (int rep = 0; rep < config.repetitions; ++rep) {
            opts.run_id = "bench-" + std::to_string(payload) + "-" + std::to_string(rep);

            std::optional<ReportRow> cen_row, dec_row;
            std::map<std::string, Payload> cen_outputs;
            if (config.mode != BenchMode::Decentralised) {
                SimTransport net(topo, config.envelope_bytes);
                auto trace = std::make_shared<ExecutionTrace>();
                install_stubs(net, graph, cm, opts, trace);
                RunResult r = centralised_execute(graph, input, net, opts, trace);
                cen_outputs = r.outputs;
                CostEstimate est =
                    estimate_cost(plan, cm, ExecMode::Centralised, config.service_delay_s);
                ReportRow row;
                row.pattern = label;
                row.n = config.n;
                row.payload_bytes = payload;
                row.mode = "centralised";
                row.total_bytes = trace->wan_total_bytes();
                row.makespan_s = trace->makespan_s;
                row.payload_only_bytes = trace->wan_payload_bytes();
                row.estimate_payload_bytes = est.payload_bytes;
                row.estimate_total_bytes = est.total_bytes;
                cen_row = row;
            }
            if (config.mode != BenchMode::Centralised) {
                SimTransport net(topo, config.envelope_bytes);
                auto trace = std::make_shared<ExecutionTrace>();
                install_stubs(net, graph, cm, opts, trace);
                install_proxies(net, plan, trace);
                RunResult r = orchestrate(plan, input, net, opts, trace);
                if (config.mode == BenchMode::Both) {
                    for (const auto& [ref, value] : r.outputs) {
                        auto it = cen_outputs.find(ref);
                        if (it == cen_outputs.end() || !it->second || !value ||
                            *it->second != *value)
                            throw Error("mode outputs diverge for '" + ref + "'");
                    }
                }
                CostEstimate est =
                    estimate_cost(plan, cm, ExecMode::Decentralised, config.service_delay_s);
                ReportRow row;
                row.pattern = label;
                row.n = config.n;
                row.payload_bytes = payload;
                row.mode = "decentralised";
                row.total_bytes = trace->wan_total_bytes();
                row.makespan_s = trace->makespan_s;
                row.payload_only_bytes = trace->wan_payload_bytes();
                row.estimate_payload_bytes = est.payload_bytes;
                row.estimate_total_bytes = est.total_bytes;
                dec_row = row;
            }
            if (cen_row && dec_row) {
                double speedup = cen_row->makespan_s / dec_row->makespan_s;
                double reduction = 1.0 - static_cast<double>(dec_row->total_bytes) /
                                             static_cast<double>(cen_row->total_bytes);
                cen_row->speedup = dec_row->speedup = speedup;
                cen_row->data_reduction = dec_row->data_reduction = reduction;
            }
            if (cen_row) report.rows.push_back(*cen_row);
            if (dec_row) report.rows.push_back(*dec_row);
        }
    }
    return report;
}

std::string ExperimentReport::csv() const {
    std::ostringstream out;
    out << "pattern,n,payload_bytes,mode,total_bytes,makespan_s,speedup,data_reduction\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.pattern << ',' << r.n << ',' << r.payload_bytes << ',' << r.mode << ','
            << r.total_bytes << ',';
        std::snprintf(buf, sizeof buf, "%.9f", r.makespan_s);
        out << buf << ',';
        if (r.speedup) {
            std::snprintf(buf, sizeof buf, "%.6f", *r.speedup);
            out << buf;
        }
        out << ',';
        if (r.data_reduction) {
            std::snprintf(buf, sizeof buf, "%.6f", *r.data_reduction);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

namespace {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void write_report_files(const ExperimentReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::filesystem::path dir(out_dir);
    write_atomic(dir / "results.csv", report.csv());

    // Gnuplot data: payload vs per-mode bytes and makespan, first repetition.
    std::map<std::string, std::map<std::uint64_t, std::pair<ReportRow, ReportRow>>> cells;
    std::set<std::pair<std::string, std::uint64_t>> seen_cen, seen_dec;
    for (const auto& r : report.rows) {
        auto key = std::make_pair(r.pattern, r.payload_bytes);
        if (r.mode == "centralised") {
            if (!seen_cen.insert(key).second) continue;
            cells[r.pattern][r.payload_bytes].first = r;
        } else {
            if (!seen_dec.insert(key).second) continue;
            cells[r.pattern][r.payload_bytes].second = r;
        }
    }
    for (const auto& [pattern, by_payload] : cells) {
        std::ostringstream bytes, makespan;
        bytes << "# payload_bytes centralised_bytes decentralised_bytes\n";
        makespan << "# payload_bytes centralised_makespan_s decentralised_makespan_s\n";
        char buf[64];
        for (const auto& [payload, pair] : by_payload) {
            bytes << payload << ' ' << pair.first.total_bytes << ' ' << pair.second.total_bytes
                  << '\n';
            std::snprintf(buf, sizeof buf, "%llu %.9f %.9f",
                          static_cast<unsigned long long>(payload), pair.first.makespan_s,
                          pair.second.makespan_s);
            makespan << buf << '\n';
        }
        write_atomic(dir / (pattern + "_bytes.dat"), bytes.str());
        write_atomic(dir / (pattern + "_makespan.dat"), makespan.str());
    }
}

}  // namespace dflow
