// dflow — compile, plan, generate, and benchmark dataflow service workflows.
//
// Subcommands:
//   check <file>                  validate a workflow, diagnostics on stderr
//   plan  <file> --topology <f>   print the deployment plan as canonical JSON
//   gen   <pattern> --n <k>       emit a generated workload as DSL source
//   bench --pattern <p> ...       run centralised vs decentralised experiments
//
// Exit codes: 0 ok, 1 domain failure (diagnostics, failed run), 2 usage/IO.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "dflow/bench.hpp"
#include "dflow/check.hpp"
#include "dflow/errors.hpp"
#include "dflow/parse.hpp"
#include "dflow/partition.hpp"

using namespace dflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream buf;
    buf << in.rdbuf();
    out = buf.str();
    return true;
}

// Accepts raw bytes or K / M / G suffixes (binary units).
std::uint64_t parse_size(const std::string& text) {
    if (text.empty()) throw CLI::ValidationError("size", "empty size");
    std::uint64_t mult = 1;
    std::string digits = text;
    switch (text.back()) {
        case 'k': case 'K': mult = 1024ull; digits.pop_back(); break;
        case 'm': case 'M': mult = 1024ull * 1024; digits.pop_back(); break;
        case 'g': case 'G': mult = 1024ull * 1024 * 1024; digits.pop_back(); break;
        default: break;
    }
    size_t pos = 0;
    std::uint64_t value = std::stoull(digits, &pos);
    if (pos != digits.size()) throw CLI::ValidationError("size", "bad size: " + text);
    return value * mult;
}

int cmd_check(const std::string& path) {
    std::string source;
    if (!read_file(path, source)) {
        std::cerr << path << ": cannot read file\n";
        return kExitUsage;
    }
    ParseResult parsed = parse(source);
    std::vector<Diagnostic> diags = parsed.diagnostics;
    if (parsed.ok()) {
        CheckResult checked = check(*parsed.spec);
        diags.insert(diags.end(), checked.diagnostics.begin(), checked.diagnostics.end());
    }
    for (const auto& d : diags) std::cerr << format_diagnostic(path, d) << "\n";
    return has_errors(diags) ? kExitDomain : kExitOk;
}

int cmd_plan(const std::string& path, const std::string& topology_path, std::uint64_t payload,
             std::uint64_t input, std::uint64_t envelope) {
    std::string source;
    if (!read_file(path, source)) {
        std::cerr << path << ": cannot read file\n";
        return kExitUsage;
    }
    ParseResult parsed = parse(source);
    std::vector<Diagnostic> diags = parsed.diagnostics;
    std::optional<CheckedWorkflow> checked;
    if (parsed.ok()) {
        CheckResult c = check(*parsed.spec);
        diags.insert(diags.end(), c.diagnostics.begin(), c.diagnostics.end());
        checked = c.checked;
    }
    for (const auto& d : diags) std::cerr << format_diagnostic(path, d) << "\n";
    if (has_errors(diags)) return kExitDomain;

    Topology topo;
    try {
        topo = Topology::load_file(topology_path);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }
    try {
        CostModel cm = CostModel::uniform(payload, input, envelope);
        WorkflowGraph g = build_graph(*checked, cm);
        DeploymentPlan plan = partition(g, topo);
        std::cout << plan_to_canonical_string(plan);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitDomain;
    }
    return kExitOk;
}

int cmd_gen(const std::string& pattern_name, int n, std::uint64_t payload) {
    auto pattern = pattern_from_string(pattern_name);
    if (!pattern || *pattern == Pattern::File) {
        std::cerr << "gen: unknown pattern '" << pattern_name
                  << "' (pipeline|aggregation|distribution)\n";
        return kExitUsage;
    }
    try {
        std::string source = gen_workflow_source(*pattern, n);
        if (payload) std::cout << "# suggested payload bytes: " << payload << "\n";
        std::cout << source;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }
    return kExitOk;
}

int cmd_bench(ExperimentConfig config) {
    try {
        config.validate();
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }
    try {
        ExperimentReport report = run_experiment(config);
        if (!config.out_dir.empty()) write_report_files(report, config.out_dir);
        std::cout << report.csv();
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "bench failed: " << e.what() << "\n";
        return kExitDomain;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decentralised dataflow workflow engine"};
    app.require_subcommand(1);

    std::string file, topology, pattern, payload_text = "1M", input_text, mode_text = "both";
    std::string payloads_text = "1M";
    int n = 3;
    int reps = 1;
    std::uint64_t seed = 1;
    std::string envelope_text = "512";
    double service_delay = 0.0;
    std::string out_dir;
    std::string orch_site;

    auto* check_cmd = app.add_subcommand("check", "validate a workflow file");
    check_cmd->add_option("file", file, "workflow (.dflow) file")->required();

    auto* plan_cmd = app.add_subcommand("plan", "partition a workflow into a deployment plan");
    plan_cmd->add_option("file", file, "workflow (.dflow) file")->required();
    plan_cmd->add_option("--topology", topology, "topology JSON file")->required();
    plan_cmd->add_option("--payload", payload_text, "uniform payload size (default 1M)");
    plan_cmd->add_option("--input", input_text, "workflow input size (default: payload)");
    plan_cmd->add_option("--envelope", envelope_text, "per-message envelope bytes");

    auto* gen_cmd = app.add_subcommand("gen", "emit a generated pattern workload");
    gen_cmd->add_option("pattern", pattern, "pipeline|aggregation|distribution")->required();
    gen_cmd->add_option("--n", n, "service count")->required();
    gen_cmd->add_option("--payload", payload_text, "suggested payload size (comment only)");

    auto* bench_cmd = app.add_subcommand("bench", "run centralised vs decentralised experiments");
    bench_cmd->add_option("--pattern", pattern, "pipeline|aggregation|distribution|file:<path>")
        ->required();
    bench_cmd->add_option("--n", n, "service count");
    bench_cmd->add_option("--payloads", payloads_text, "comma-separated payload sweep");
    bench_cmd->add_option("--topology", topology, "topology JSON file (default: generated)");
    bench_cmd->add_option("--seed", seed, "run seed");
    bench_cmd->add_option("--mode", mode_text, "centralised|decentralised|both");
    bench_cmd->add_option("--reps", reps, "repetitions per cell");
    bench_cmd->add_option("--out", out_dir, "output directory for CSV and plot data");
    bench_cmd->add_option("--envelope", envelope_text, "per-message envelope bytes");
    bench_cmd->add_option("--service-delay", service_delay, "stub processing delay seconds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
            app.exit(e);
            return kExitOk;
        }
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*check_cmd) return cmd_check(file);
        if (*plan_cmd) {
            std::uint64_t payload = parse_size(payload_text);
            std::uint64_t input = input_text.empty() ? payload : parse_size(input_text);
            return cmd_plan(file, topology, payload, input, parse_size(envelope_text));
        }
        if (*gen_cmd) {
            std::uint64_t hint =
                gen_cmd->count("--payload") ? parse_size(payload_text) : 0;
            return cmd_gen(pattern, n, hint);
        }
        if (*bench_cmd) {
            ExperimentConfig config;
            if (pattern.rfind("file:", 0) == 0) {
                config.pattern = Pattern::File;
                config.file = pattern.substr(5);
            } else {
                auto p = pattern_from_string(pattern);
                if (!p || *p == Pattern::File) {
                    std::cerr << "bench: unknown pattern '" << pattern << "'\n";
                    return kExitUsage;
                }
                config.pattern = *p;
            }
            config.n = n;
            std::stringstream list(payloads_text);
            std::string item;
            while (std::getline(list, item, ','))
                if (!item.empty()) config.payloads.push_back(parse_size(item));
            if (!topology.empty()) config.topology_file = topology;
            config.seed = seed;
            if (mode_text == "centralised") config.mode = BenchMode::Centralised;
            else if (mode_text == "decentralised") config.mode = BenchMode::Decentralised;
            else if (mode_text == "both") config.mode = BenchMode::Both;
            else {
                std::cerr << "bench: unknown mode '" << mode_text << "'\n";
                return kExitUsage;
            }
            config.repetitions = reps;
            config.envelope_bytes = parse_size(envelope_text);
            config.service_delay_s = service_delay;
            config.out_dir = out_dir;
            return cmd_bench(std::move(config));
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument&) {
        std::cerr << "bad numeric argument\n";
        return kExitUsage;
    } catch (const std::out_of_range&) {
        std::cerr << "numeric argument out of range\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitDomain;
    }
    return kExitUsage;
}
