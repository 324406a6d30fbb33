#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dflow/cost.hpp"
#include "dflow/partition.hpp"
#include "dflow/topology.hpp"

namespace dflow {

enum class Pattern { Pipeline, Aggregation, Distribution, File };

// DSL source for a generated workload: service i pinned to site s<i>, the
// orchestrator at s0. Pipeline needs n >= 1, the fan patterns n >= 2.
std::string gen_workflow_source(Pattern pattern, int n);

std::optional<Pattern> pattern_from_string(const std::string& s);
const char* to_string(Pattern p);

enum class BenchMode { Centralised, Decentralised, Both };

struct ExperimentConfig {
    Pattern pattern = Pattern::Pipeline;
    std::string file;  // pattern == File
    int n = 3;
    std::vector<std::uint64_t> payloads;  // bytes, one experiment cell each
    std::optional<std::string> topology_file;
    std::uint64_t seed = 1;
    BenchMode mode = BenchMode::Both;
    int repetitions = 1;
    std::uint64_t envelope_bytes = CostModel::kDefaultEnvelopeBytes;
    double service_delay_s = 0.0;
    std::string out_dir;

    // Throws Error on invalid combinations (n too small, empty payloads, ...).
    void validate() const;
};

struct ReportRow {
    std::string pattern;
    int n = 0;
    std::uint64_t payload_bytes = 0;
    std::string mode;  // "centralised" | "decentralised"
    std::uint64_t total_bytes = 0;
    double makespan_s = 0;
    std::optional<double> speedup;         // cen makespan / dec makespan
    std::optional<double> data_reduction;  // 1 - dec bytes / cen bytes
    // Reconciliation fields (not CSV columns).
    std::uint64_t payload_only_bytes = 0;
    std::uint64_t estimate_payload_bytes = 0;
    std::uint64_t estimate_total_bytes = 0;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
    std::string csv() const;  // header + one row per cell, deterministic
};

// Runs every configured cell on the simulated transport. Deterministic for a
// fixed seed. Throws on any execution failure (no partial results).
ExperimentReport run_experiment(const ExperimentConfig& config);

// results.csv plus per-pattern gnuplot data files, written atomically.
void write_report_files(const ExperimentReport& report, const std::string& out_dir);

}  // namespace dflow
