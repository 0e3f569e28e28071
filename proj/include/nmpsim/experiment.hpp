#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nmpsim/node.hpp"

namespace nmpsim {

// One experiment: a node/baseline configuration plus the grid of
// (benchmark x batch x design) cells to evaluate. Loaded from a JSON file
// with strict schema validation (unknown keys are rejected).
struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::uint32_t inferences = 1;
    PoolGeometry geom{32, 32ull << 20};
    DramTimingParams dram;
    NmpCoreConfig core;
    CpuSystemConfig cpu;
    LinkSpec pcie{"PCIe", 16.0, 10.0};
    LinkSpec nvlink{"NVLINK", 150.0, 5.0};
    double gpu_local_bw_gbs = 900.0;
    DnnTimeTable t_dnn;
    std::vector<BenchmarkConfig> benchmarks;
    std::vector<std::uint32_t> batches{64};
    std::vector<DesignKind> designs;
    std::string output_csv;  // empty: caller decides (CLI prints to stdout)
    std::string trace_dir = ".";
};

// All four presets, all five designs, B=64.
ExperimentConfig default_experiment();

// Parses and validates the JSON text. Throws ConfigError naming the
// offending key.
ExperimentConfig load_experiment(const std::string& json_text);

// Round-trips a config back to JSON (documents the schema; load(dump(c))
// reproduces c).
std::string dump_experiment(const ExperimentConfig& cfg);

// Runs every (benchmark x batch x design) cell and renders the CSV report,
// header comment line first ("# seed=<seed>"). Deterministic: same config
// and seed give byte-identical output.
std::string run_experiment(const ExperimentConfig& cfg);

// Per-rank DRAM request traces for every (benchmark, first batch) pair,
// keyed "<benchmark>_rank<k>". Text format as dram export_trace.
std::map<std::string, std::string> build_traces(const ExperimentConfig& cfg);

struct ValidationReport {
    std::uint64_t cases = 0;
    std::uint64_t failures = 0;
    std::string log;  // minimized reproduction dumps for every failure
};

// Randomized functional equivalence: for each case, a random geometry and
// instruction are executed three ways (flat isa semantics, rank-partitioned
// node execution, dense reference) and compared bit-exactly.
// inject_fault corrupts one destination byte of the partitioned path in the
// first case, to exercise the failure reporting itself.
ValidationReport run_validation(std::uint64_t seed, std::uint64_t cases,
                                bool inject_fault = false);

}  // namespace nmpsim
