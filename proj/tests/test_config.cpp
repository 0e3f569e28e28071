#include <doctest.h>

#include <sstream>

#include "nmpsim/experiment.hpp"

using namespace nmpsim;

namespace {

// Small grid so config tests stay fast.
const char* kSmallConfig = R"({
  "seed": 9,
  "geometry": {"num_ranks": 8, "rank_capacity_bytes": 8388608},
  "benchmarks": [{"preset": "NCF", "rows_per_table": 2048}],
  "batches": [16],
  "designs": ["TDIMM", "GPU_ORACLE"]
})";

std::size_t count_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#' && line.rfind("run_id", 0) != 0) {
            ++rows;
        }
    }
    return rows;
}

}  // namespace

TEST_CASE("config parsing applies defaults and overrides") {
    const ExperimentConfig cfg = load_experiment(kSmallConfig);
    CHECK(cfg.seed == 9);
    CHECK(cfg.geom.num_ranks == 8);
    CHECK(cfg.benchmarks.size() == 1);
    CHECK(cfg.benchmarks[0].name == "NCF");
    CHECK(cfg.benchmarks[0].rows_per_table == 2048);
    CHECK(cfg.benchmarks[0].num_tables == 4);  // from the preset
    CHECK(cfg.batches == std::vector<std::uint32_t>{16});
    REQUIRE(cfg.designs.size() == 2);
    CHECK(cfg.designs[0] == DesignKind::TensorDimm);
    // untouched sections keep their defaults
    CHECK(cfg.dram.CL == 22);
    CHECK(cfg.nvlink.bandwidth_gbs == 150.0);
}

TEST_CASE("unknown keys are rejected, naming the key") {
    for (const char* bad :
         {R"({"sead": 1})", R"({"geometry": {"ranks": 4}})",
          R"({"dram": {"tCL": 20}})",
          R"({"benchmarks": [{"preset": "NCF", "tables": 2}]})"}) {
        CHECK_THROWS_AS(load_experiment(bad), ConfigError);
    }
    try {
        load_experiment(R"({"sead": 1})");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("sead") != std::string::npos);
    }
}

TEST_CASE("invalid configs are rejected") {
    CHECK_THROWS_AS(load_experiment("not json"), ConfigError);
    CHECK_THROWS_AS(load_experiment(R"({"designs": []})"), ConfigError);
    CHECK_THROWS_AS(load_experiment(R"({"batches": []})"), ConfigError);
    CHECK_THROWS_AS(load_experiment(R"({"designs": ["TPU"]})"), ConfigError);
    CHECK_THROWS_AS(load_experiment(R"({"geometry": {"num_ranks": 3}})"),
                    ConfigError);
    CHECK_THROWS_AS(load_experiment(R"({"dram": {"tRC": 73}})"), ConfigError);
}

TEST_CASE("config round-trips through its JSON dump") {
    const ExperimentConfig a = load_experiment(kSmallConfig);
    const ExperimentConfig b = load_experiment(dump_experiment(a));
    CHECK(dump_experiment(a) == dump_experiment(b));
    CHECK(run_experiment(a) == run_experiment(b));
}

TEST_CASE("report shape and determinism") {
    ExperimentConfig cfg = load_experiment(kSmallConfig);
    const std::string csv = run_experiment(cfg);
    CHECK(csv.rfind("# seed=9\n", 0) == 0);
    CHECK(csv.find("run_id,design,benchmark,batch,R,t_lookup_us,t_reduce_us,"
                   "t_transfer_us,t_dnn_us,total_us,agg_bandwidth_gbs,"
                   "row_hit_rate") != std::string::npos);
    CHECK(count_rows(csv) == 2);  // 1 benchmark x 1 batch x 2 designs
    CHECK(csv == run_experiment(cfg));

    // batch sweep multiplies the row count, batch column matches
    cfg.batches = {8, 16, 32, 64};
    const std::string sweep = run_experiment(cfg);
    CHECK(count_rows(sweep) == 8);
    for (auto b : {",8,", ",16,", ",32,", ",64,"}) {
        CHECK(sweep.find(b) != std::string::npos);
    }

    cfg.designs.clear();
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("per-rank traces round-trip through the text format") {
    ExperimentConfig cfg = load_experiment(kSmallConfig);
    const auto traces = build_traces(cfg);
    CHECK(traces.size() == cfg.geom.num_ranks);
    std::uint64_t total = 0;
    for (const auto& [name, text] : traces) {
        CHECK(name.rfind("NCF_rank", 0) == 0);
        const auto reqs = import_trace(text);
        CHECK(export_trace(reqs) == text);
        total += reqs.size();
    }
    CHECK(total > 0);
}

TEST_CASE("validation harness passes clean and catches injected faults") {
    const ValidationReport ok = run_validation(11, 64);
    CHECK(ok.cases == 64);
    CHECK(ok.failures == 0);
    CHECK(ok.log.empty());

    const ValidationReport none = run_validation(11, 0);
    CHECK(none.cases == 0);
    CHECK(none.failures == 0);

    const ValidationReport bad = run_validation(11, 4, true);
    CHECK(bad.failures == 1);
    CHECK(bad.log.find("FAILED") != std::string::npos);
    CHECK(bad.log.find("mismatch") != std::string::npos);
}
