#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dflow/bench.hpp"
#include "dflow/graph.hpp"
#include "testutil.hpp"

using namespace dflow;
namespace tu = dflow::testutil;

namespace {

constexpr std::uint64_t MB = 1024 * 1024;

std::vector<ReportRow> rows_for(const ExperimentReport& r, const std::string& mode) {
    std::vector<ReportRow> out;
    for (const auto& row : r.rows)
        if (row.mode == mode) out.push_back(row);
    return out;
}

}  // namespace

TEST_CASE("gen: every generated workload checks clean, n in [1..16]") {
    for (int n = 1; n <= 16; ++n) {
        for (auto pattern : {Pattern::Pipeline, Pattern::Aggregation, Pattern::Distribution}) {
            if (pattern != Pattern::Pipeline && n < 2) continue;
            std::string src = gen_workflow_source(pattern, n);
            ParseResult parsed = parse(src);
            REQUIRE(parsed.ok());
            CheckResult checked = check(*parsed.spec);
            REQUIRE(checked.ok());
            CHECK(checked.diagnostics.empty());
        }
    }
}

TEST_CASE("gen: classify reports exactly the requested pattern") {
    auto classify_gen = [](Pattern p, int n) {
        std::string src = gen_workflow_source(p, n);
        WorkflowGraph g = build_graph(tu::must_check(src), CostModel::uniform(10, 10));
        return classify(g);
    };
    for (int n : {2, 3, 4, 8}) {
        auto pipe = classify_gen(Pattern::Pipeline, n);
        REQUIRE(pipe.size() == 1);
        CHECK(pipe[0].kind == PatternKind::Pipeline);

        auto agg = classify_gen(Pattern::Aggregation, n);
        REQUIRE(agg.size() == 1);
        CHECK(agg[0].kind == PatternKind::Aggregation);

        auto dist = classify_gen(Pattern::Distribution, n);
        REQUIRE(dist.size() == 1);
        CHECK(dist[0].kind == PatternKind::Distribution);
    }
    // A one-stage pipeline is a single isolated node: no pattern.
    CHECK(classify_gen(Pattern::Pipeline, 1).empty());
}

TEST_CASE("gen: bad n is rejected") {
    CHECK_THROWS_AS(gen_workflow_source(Pattern::Pipeline, 0), Error);
    CHECK_THROWS_AS(gen_workflow_source(Pattern::Aggregation, 1), Error);
    CHECK_THROWS_AS(gen_workflow_source(Pattern::Distribution, 1), Error);
}

TEST_CASE("bench: pipeline n=5, zero envelope, byte ratio is exactly 0.6") {
    ExperimentConfig config;
    config.pattern = Pattern::Pipeline;
    config.n = 5;
    config.payloads = {1 * MB};
    config.envelope_bytes = 0;
    ExperimentReport report = run_experiment(config);

    auto cen = rows_for(report, "centralised");
    auto dec = rows_for(report, "decentralised");
    REQUIRE(cen.size() == 1);
    REQUIRE(dec.size() == 1);
    // dec/cen == (n+1)/(2n) checked in exact integer arithmetic.
    CHECK(dec[0].total_bytes * 2 * 5 == cen[0].total_bytes * (5 + 1));
    CHECK(*cen[0].speedup > 1.0);
}

TEST_CASE("bench: absolute byte savings grow strictly with payload") {
    for (auto pattern : {Pattern::Pipeline, Pattern::Aggregation, Pattern::Distribution}) {
        ExperimentConfig config;
        config.pattern = pattern;
        config.n = 3;
        config.payloads = {1 * MB, 2 * MB, 4 * MB, 8 * MB};
        ExperimentReport report = run_experiment(config);
        auto cen = rows_for(report, "centralised");
        auto dec = rows_for(report, "decentralised");
        REQUIRE(cen.size() == 4);
        REQUIRE(dec.size() == 4);
        std::uint64_t prev_saving = 0;
        for (size_t i = 0; i < 4; ++i) {
            REQUIRE(cen[i].total_bytes > dec[i].total_bytes);
            std::uint64_t saving = cen[i].total_bytes - dec[i].total_bytes;
            CHECK(saving > prev_saving);
            prev_saving = saving;
        }
    }
}

TEST_CASE("bench: repetitions with a fixed seed give identical rows") {
    ExperimentConfig config;
    config.pattern = Pattern::Aggregation;
    config.n = 3;
    config.payloads = {256 * 1024};
    config.repetitions = 3;
    ExperimentReport report = run_experiment(config);
    auto cen = rows_for(report, "centralised");
    auto dec = rows_for(report, "decentralised");
    REQUIRE(cen.size() == 3);
    REQUIRE(dec.size() == 3);
    for (size_t i = 1; i < 3; ++i) {
        CHECK(cen[i].total_bytes == cen[0].total_bytes);
        CHECK(cen[i].makespan_s == cen[0].makespan_s);
        CHECK(dec[i].total_bytes == dec[0].total_bytes);
        CHECK(dec[i].makespan_s == dec[0].makespan_s);
    }
    // And the CSV itself is reproducible end to end.
    CHECK(run_experiment(config).csv() == report.csv());
}

TEST_CASE("bench: CSV totals reconcile with the trace and the estimator") {
    ExperimentConfig config;
    config.pattern = Pattern::Distribution;
    config.n = 4;
    config.payloads = {512 * 1024, 1 * MB};
    ExperimentReport report = run_experiment(config);
    for (const auto& row : report.rows) {
        if (row.mode == "decentralised") {
            CHECK(row.estimate_payload_bytes == row.payload_only_bytes);
            CHECK(row.estimate_total_bytes == row.total_bytes);
        } else {
            CHECK(row.estimate_total_bytes == row.total_bytes);
        }
    }
}

TEST_CASE("bench: file workloads run through the same harness") {
    std::filesystem::path dir = std::filesystem::temp_directory_path() / "dflow_bench_test";
    std::filesystem::create_directories(dir);
    std::filesystem::path wf = dir / "fixture.dflow";
    {
        std::ofstream out(wf);
        out << tu::kComposite;
    }
    ExperimentConfig config;
    config.pattern = Pattern::File;
    config.file = wf.string();
    config.payloads = {64 * 1024};
    ExperimentReport report = run_experiment(config);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].pattern == "fixture");
    CHECK(report.rows[0].total_bytes > report.rows[1].total_bytes);
}

TEST_CASE("bench: report files are written atomically and parse back") {
    ExperimentConfig config;
    config.pattern = Pattern::Pipeline;
    config.n = 3;
    config.payloads = {128 * 1024, 256 * 1024};
    config.out_dir = (std::filesystem::temp_directory_path() / "dflow_bench_out").string();
    ExperimentReport report = run_experiment(config);
    write_report_files(report, config.out_dir);

    std::filesystem::path dir(config.out_dir);
    REQUIRE(std::filesystem::exists(dir / "results.csv"));
    REQUIRE(std::filesystem::exists(dir / "pipeline_bytes.dat"));
    REQUIRE(std::filesystem::exists(dir / "pipeline_makespan.dat"));
    CHECK_FALSE(std::filesystem::exists(dir / "results.csv.tmp"));

    std::ifstream csv(dir / "results.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "pattern,n,payload_bytes,mode,total_bytes,makespan_s,speedup,data_reduction");
    int lines = 0;
    for (std::string line; std::getline(csv, line);)
        if (!line.empty()) ++lines;
    CHECK(lines == 4);  // 2 payloads x 2 modes
}

TEST_CASE("bench: invalid configurations are rejected up front") {
    ExperimentConfig config;
    config.pattern = Pattern::Aggregation;
    config.n = 1;
    config.payloads = {1024};
    CHECK_THROWS_AS(run_experiment(config), Error);
    config.n = 3;
    config.payloads = {};
    CHECK_THROWS_AS(run_experiment(config), Error);
    config.payloads = {1024};
    config.repetitions = 0;
    CHECK_THROWS_AS(run_experiment(config), Error);
}
