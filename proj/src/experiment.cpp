#include "nmpsim/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <random>
#include <set>

#include <json.hpp>

#include "nmpsim/errors.hpp"

namespace nmpsim {

using nlohmann::json;

namespace {

void check_keys(const json& j, const char* ctx,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        throw ConfigError(std::string(ctx) + " must be an object");
    }
    for (const auto& [key, _] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return key == k;
            }) == allowed.end()) {
            throw ConfigError("unknown key '" + key + "' in " + ctx);
        }
    }
}

template <typename T>
void get(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad value for '") + key +
                              "': " + e.what());
        }
    }
}

void parse_link(const json& j, const char* ctx, LinkSpec& link) {
    check_keys(j, ctx, {"name", "bandwidth_gbs", "fixed_latency_us"});
    get(j, "name", link.name);
    get(j, "bandwidth_gbs", link.bandwidth_gbs);
    get(j, "fixed_latency_us", link.fixed_latency_us);
}

IndexDistribution parse_distribution(const std::string& s) {
    if (s == "uniform") return IndexDistribution::Uniform;
    if (s == "zipf") return IndexDistribution::Zipf;
    if (s == "sequential") return IndexDistribution::Sequential;
    throw ConfigError("unknown index_distribution '" + s + "'");
}

const char* distribution_name(IndexDistribution d) {
    switch (d) {
        case IndexDistribution::Uniform: return "uniform";
        case IndexDistribution::Zipf: return "zipf";
        case IndexDistribution::Sequential: return "sequential";
    }
    return "?";
}

BenchmarkConfig parse_benchmark(const json& j) {
    if (j.is_string()) {
        return benchmark_preset(j.get<std::string>());
    }
    check_keys(j, "benchmarks[]",
               {"preset", "name", "num_tables", "max_reduction",
                "embedding_dim", "rows_per_table", "index_distribution",
                "zipf_s", "multi_hot", "reduce_op", "fc_layers"});
    BenchmarkConfig cfg;
    if (auto it = j.find("preset"); it != j.end()) {
        cfg = benchmark_preset(it->get<std::string>());
    }
    get(j, "name", cfg.name);
    get(j, "num_tables", cfg.num_tables);
    get(j, "max_reduction", cfg.max_reduction);
    get(j, "embedding_dim", cfg.embedding_dim);
    get(j, "rows_per_table", cfg.rows_per_table);
    get(j, "zipf_s", cfg.zipf_s);
    get(j, "multi_hot", cfg.multi_hot);
    get(j, "fc_layers", cfg.fc_layers);
    if (auto it = j.find("index_distribution"); it != j.end()) {
        cfg.index_distribution = parse_distribution(it->get<std::string>());
    }
    if (auto it = j.find("reduce_op"); it != j.end()) {
        const std::string op = it->get<std::string>();
        if (op == "reduce") {
            cfg.reduce_op = Opcode::Reduce;
        } else if (op == "average") {
            cfg.reduce_op = Opcode::Average;
        } else {
            throw ConfigError("reduce_op must be 'reduce' or 'average'");
        }
    }
    return cfg;
}

void parse_dram(const json& j, DramTimingParams& p) {
    check_keys(j, "dram",
               {"data_rate_mts", "tCK_ps", "CL", "tRCD", "tRP", "tRAS", "tRC",
                "tBL", "tCCD_L", "tCCD_S", "tRRD_S", "tRRD_L", "tFAW", "tWR",
                "tRTP", "rw_turnaround", "num_banks", "bank_groups",
                "row_bytes", "refresh_enabled", "tREFI", "tRFC"});
    get(j, "data_rate_mts", p.data_rate_mts);
    get(j, "tCK_ps", p.tCK_ps);
    get(j, "CL", p.CL);
    get(j, "tRCD", p.tRCD);
    get(j, "tRP", p.tRP);
    get(j, "tRAS", p.tRAS);
    get(j, "tRC", p.tRC);
    get(j, "tBL", p.tBL);
    get(j, "tCCD_L", p.tCCD_L);
    get(j, "tCCD_S", p.tCCD_S);
    get(j, "tRRD_S", p.tRRD_S);
    get(j, "tRRD_L", p.tRRD_L);
    get(j, "tFAW", p.tFAW);
    get(j, "tWR", p.tWR);
    get(j, "tRTP", p.tRTP);
    get(j, "rw_turnaround", p.rw_turnaround);
    get(j, "num_banks", p.num_banks);
    get(j, "bank_groups", p.bank_groups);
    get(j, "row_bytes", p.row_bytes);
    get(j, "refresh_enabled", p.refresh_enabled);
    get(j, "tREFI", p.tREFI);
    get(j, "tRFC", p.tRFC);
}

}  // namespace

ExperimentConfig default_experiment() {
    ExperimentConfig cfg;
    for (const auto& name : benchmark_preset_names()) {
        cfg.benchmarks.push_back(benchmark_preset(name));
    }
    cfg.designs = {DesignKind::CpuOnly, DesignKind::CpuGpu,
                   DesignKind::PooledMem, DesignKind::TensorDimm,
                   DesignKind::GpuOracle};
    return cfg;
}

ExperimentConfig load_experiment(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "config",
               {"seed", "inferences", "geometry", "dram", "core", "cpu",
                "pcie", "nvlink", "gpu_local_bw_gbs", "t_dnn", "benchmarks",
                "batches", "designs", "output_csv", "trace_dir"});

    ExperimentConfig cfg;
    get(j, "seed", cfg.seed);
    get(j, "inferences", cfg.inferences);
    get(j, "gpu_local_bw_gbs", cfg.gpu_local_bw_gbs);
    get(j, "output_csv", cfg.output_csv);
    get(j, "trace_dir", cfg.trace_dir);

    if (auto it = j.find("geometry"); it != j.end()) {
        check_keys(*it, "geometry", {"num_ranks", "rank_capacity_bytes"});
        get(*it, "num_ranks", cfg.geom.num_ranks);
        get(*it, "rank_capacity_bytes", cfg.geom.rank_capacity_bytes);
    }
    if (auto it = j.find("dram"); it != j.end()) parse_dram(*it, cfg.dram);
    if (auto it = j.find("core"); it != j.end()) {
        check_keys(*it, "core",
                   {"alu_lanes", "alu_clock_mhz", "input_queue_bytes",
                    "output_queue_bytes", "fill_latency_ns"});
        get(*it, "alu_lanes", cfg.core.alu_lanes);
        get(*it, "alu_clock_mhz", cfg.core.alu_clock_mhz);
        get(*it, "input_queue_bytes", cfg.core.input_queue_bytes);
        get(*it, "output_queue_bytes", cfg.core.output_queue_bytes);
        get(*it, "fill_latency_ns", cfg.core.fill_latency_ns);
    }
    if (auto it = j.find("cpu"); it != j.end()) {
        check_keys(*it, "cpu", {"channels", "dimms_per_channel"});
        get(*it, "channels", cfg.cpu.channels);
        get(*it, "dimms_per_channel", cfg.cpu.dimms_per_channel);
    }
    if (auto it = j.find("pcie"); it != j.end()) {
        parse_link(*it, "pcie", cfg.pcie);
    }
    if (auto it = j.find("nvlink"); it != j.end()) {
        parse_link(*it, "nvlink", cfg.nvlink);
    }
    if (auto it = j.find("t_dnn"); it != j.end()) {
        check_keys(*it, "t_dnn", {"cpu_us", "gpu_us", "gpu_with_reduce_us"});
        get(*it, "cpu_us", cfg.t_dnn.cpu_us);
        get(*it, "gpu_us", cfg.t_dnn.gpu_us);
        get(*it, "gpu_with_reduce_us", cfg.t_dnn.gpu_with_reduce_us);
    }
    if (auto it = j.find("benchmarks"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("'benchmarks' must be an array");
        for (const auto& b : *it) cfg.benchmarks.push_back(parse_benchmark(b));
    } else {
        for (const auto& name : benchmark_preset_names()) {
            cfg.benchmarks.push_back(benchmark_preset(name));
        }
    }
    if (auto it = j.find("batches"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("'batches' must be an array");
        cfg.batches.clear();
        for (const auto& b : *it) cfg.batches.push_back(b.get<std::uint32_t>());
    }
    if (auto it = j.find("designs"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("'designs' must be an array");
        for (const auto& d : *it) {
            cfg.designs.push_back(parse_design(d.get<std::string>()));
        }
    } else {
        cfg.designs = default_experiment().designs;
    }

    if (cfg.benchmarks.empty()) throw ConfigError("'benchmarks' is empty");
    if (cfg.batches.empty()) throw ConfigError("'batches' is empty");
    if (cfg.designs.empty()) throw ConfigError("'designs' is empty");
    validate(cfg.geom);
    validate(cfg.dram);
    validate(cfg.core, cfg.dram);
    for (const auto& b : cfg.benchmarks) validate(b);
    return cfg;
}

std::string dump_experiment(const ExperimentConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["inferences"] = cfg.inferences;
    j["geometry"] = {{"num_ranks", cfg.geom.num_ranks},
                     {"rank_capacity_bytes", cfg.geom.rank_capacity_bytes}};
    const DramTimingParams& p = cfg.dram;
    j["dram"] = {{"data_rate_mts", p.data_rate_mts},
                 {"tCK_ps", p.tCK_ps},
                 {"CL", p.CL},
                 {"tRCD", p.tRCD},
                 {"tRP", p.tRP},
                 {"tRAS", p.tRAS},
                 {"tRC", p.tRC},
                 {"tBL", p.tBL},
                 {"tCCD_L", p.tCCD_L},
                 {"tCCD_S", p.tCCD_S},
                 {"tRRD_S", p.tRRD_S},
                 {"tRRD_L", p.tRRD_L},
                 {"tFAW", p.tFAW},
                 {"tWR", p.tWR},
                 {"tRTP", p.tRTP},
                 {"rw_turnaround", p.rw_turnaround},
                 {"num_banks", p.num_banks},
                 {"bank_groups", p.bank_groups},
                 {"row_bytes", p.row_bytes},
                 {"refresh_enabled", p.refresh_enabled},
                 {"tREFI", p.tREFI},
                 {"tRFC", p.tRFC}};
    j["core"] = {{"alu_lanes", cfg.core.alu_lanes},
                 {"alu_clock_mhz", cfg.core.alu_clock_mhz},
                 {"input_queue_bytes", cfg.core.input_queue_bytes},
                 {"output_queue_bytes", cfg.core.output_queue_bytes},
                 {"fill_latency_ns", cfg.core.fill_latency_ns}};
    j["cpu"] = {{"channels", cfg.cpu.channels},
                {"dimms_per_channel", cfg.cpu.dimms_per_channel}};
    j["pcie"] = {{"name", cfg.pcie.name},
                 {"bandwidth_gbs", cfg.pcie.bandwidth_gbs},
                 {"fixed_latency_us", cfg.pcie.fixed_latency_us}};
    j["nvlink"] = {{"name", cfg.nvlink.name},
                   {"bandwidth_gbs", cfg.nvlink.bandwidth_gbs},
                   {"fixed_latency_us", cfg.nvlink.fixed_latency_us}};
    j["gpu_local_bw_gbs"] = cfg.gpu_local_bw_gbs;
    j["t_dnn"] = {{"cpu_us", cfg.t_dnn.cpu_us},
                  {"gpu_us", cfg.t_dnn.gpu_us},
                  {"gpu_with_reduce_us", cfg.t_dnn.gpu_with_reduce_us}};
    j["benchmarks"] = json::array();
    for (const auto& b : cfg.benchmarks) {
        j["benchmarks"].push_back(
            {{"name", b.name},
             {"num_tables", b.num_tables},
             {"max_reduction", b.max_reduction},
             {"embedding_dim", b.embedding_dim},
             {"rows_per_table", b.rows_per_table},
             {"index_distribution", distribution_name(b.index_distribution)},
             {"zipf_s", b.zipf_s},
             {"multi_hot", b.multi_hot},
             {"reduce_op",
              b.reduce_op == Opcode::Average ? "average" : "reduce"},
             {"fc_layers", b.fc_layers}});
    }
    j["batches"] = cfg.batches;
    j["designs"] = json::array();
    for (const auto& d : cfg.designs) j["designs"].push_back(to_string(d));
    j["output_csv"] = cfg.output_csv;
    j["trace_dir"] = cfg.trace_dir;
    return j.dump(2) + "\n";
}

std::string run_experiment(const ExperimentConfig& cfg) {
    validate(cfg.geom);
    validate(cfg.dram);
    validate(cfg.core, cfg.dram);
    if (cfg.designs.empty()) throw ConfigError("no design points selected");
    if (cfg.benchmarks.empty()) throw ConfigError("no benchmarks selected");
    if (cfg.batches.empty()) throw ConfigError("no batch sizes selected");

    DesignPointInputs inputs;
    inputs.geom = cfg.geom;
    inputs.dram = cfg.dram;
    inputs.core = cfg.core;
    inputs.cpu = cfg.cpu;
    inputs.pcie = cfg.pcie;
    inputs.nvlink = cfg.nvlink;
    inputs.gpu_local_bw_gbs = cfg.gpu_local_bw_gbs;
    inputs.t_dnn = cfg.t_dnn;

    std::string out = "# seed=" + std::to_string(cfg.seed) + "\n";
    out +=
        "run_id,design,benchmark,batch,R,t_lookup_us,t_reduce_us,"
        "t_transfer_us,t_dnn_us,total_us,agg_bandwidth_gbs,row_hit_rate\n";

    std::uint64_t run_id = 0;
    char buf[256];
    for (const BenchmarkConfig& bench : cfg.benchmarks) {
        for (std::uint32_t batch : cfg.batches) {
            BenchmarkConfig b = bench;
            b.batch_size = batch;
            MemoryPoolImage pool(cfg.geom.total_capacity());
            const InstructionStream stream =
                build_stream(b, cfg.geom, pool, cfg.seed, cfg.inferences);
            for (DesignKind design : cfg.designs) {
                const LatencyBreakdown r =
                    evaluate_design(design, inputs, stream, pool);
                std::snprintf(buf, sizeof buf,
                              "%llu,%s,%s,%u,%u,%.6f,%.6f,%.6f,%.6f,%.6f,"
                              "%.6f,%.6f\n",
                              static_cast<unsigned long long>(run_id),
                              to_string(design), b.name.c_str(), batch,
                              cfg.geom.num_ranks, r.t_lookup_us, r.t_reduce_us,
                              r.t_transfer_us, r.t_dnn_us, r.total_us,
                              r.agg_bandwidth_gbs, r.row_hit_rate);
                out += buf;
                ++run_id;
            }
        }
    }
    return out;
}

std::map<std::string, std::string> build_traces(const ExperimentConfig& cfg) {
    validate(cfg.geom);
    std::map<std::string, std::string> traces;
    for (const BenchmarkConfig& bench : cfg.benchmarks) {
        BenchmarkConfig b = bench;
        b.batch_size = cfg.batches.front();
        MemoryPoolImage pool(cfg.geom.total_capacity());
        const InstructionStream stream =
            build_stream(b, cfg.geom, pool, cfg.seed, cfg.inferences);
        std::vector<std::vector<BlockRequest>> per_rank(cfg.geom.num_ranks);
        for (const TensorInstruction& instr : stream.instrs) {
            for (std::uint32_t r = 0; r < cfg.geom.num_ranks; ++r) {
                const RankWorkItem work =
                    lower_instruction(cfg.geom, pool, instr, r);
                per_rank[r].insert(per_rank[r].end(), work.requests.begin(),
                                   work.requests.end());
            }
            execute(pool, instr);  // later GATHERs read earlier results
        }
        for (std::uint32_t r = 0; r < cfg.geom.num_ranks; ++r) {
            traces[b.name + "_rank" + std::to_string(r)] =
                export_trace(per_rank[r]);
        }
    }
    return traces;
}

namespace {

void dump_case(std::string& log, std::uint64_t case_id,
               const PoolGeometry& geom, const TensorInstruction& instr,
               const char* path, std::uint64_t offset) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "case %llu FAILED (%s path)\n"
                  "  R=%u rank_capacity=%llu\n"
                  "  op=%s dst=0x%llx src=0x%llx idx=0x%llx B=%u E=%u N=%u\n"
                  "  first mismatch at pool offset %llu\n",
                  static_cast<unsigned long long>(case_id), path,
                  geom.num_ranks,
                  static_cast<unsigned long long>(geom.rank_capacity_bytes),
                  to_string(instr.opcode),
                  static_cast<unsigned long long>(instr.dst_base),
                  static_cast<unsigned long long>(instr.src_base),
                  static_cast<unsigned long long>(instr.index_base),
                  instr.batch_size, instr.embedding_bytes, instr.num_inputs,
                  static_cast<unsigned long long>(offset));
    log += buf;
    log += "  wire:\n";
    for (char c : to_hex(encode(instr))) {
        if (log.back() == '\n') log += "    ";
        log += c;
    }
}

}  // namespace

ValidationReport run_validation(std::uint64_t seed, std::uint64_t cases,
                                bool inject_fault) {
    ValidationReport report;
    std::mt19937_64 rng(seed ^ 0x5eedULL);

    for (std::uint64_t c = 0; c < cases; ++c) {
        const std::uint32_t R = 1u << (rng() % 7);  // 1 .. 64
        const PoolGeometry geom{R, 64 * 1024};
        const std::uint32_t eb = 64u << (rng() % 3);

        TensorInstruction instr;
        const std::uint32_t pick = rng() % 3;
        instr.opcode = pick == 0   ? Opcode::Gather
                       : pick == 1 ? Opcode::Reduce
                                   : Opcode::Average;
        instr.embedding_bytes = eb;

        const std::uint64_t align = std::uint64_t{R} * kBlockBytes;
        std::uint64_t cursor = 0;
        const auto alloc = [&](std::uint64_t bytes) {
            const std::uint64_t base = (cursor + align - 1) / align * align;
            cursor = base + bytes;
            return base;
        };

        std::uint64_t rows = 0;
        if (instr.opcode == Opcode::Gather) {
            rows = 4 + rng() % 61;
            instr.batch_size = 1 + static_cast<std::uint32_t>(rng() % 16);
            instr.num_inputs = 1;
            instr.src_base = alloc(rows * eb);
            instr.index_base = alloc(std::uint64_t{instr.batch_size} * 4);
            instr.dst_base = alloc(instr.dst_bytes());
        } else {
            instr.num_inputs = 2 + static_cast<std::uint32_t>(rng() % 7);
            instr.batch_size = 1u << (rng() % 4);
            instr.src_base = alloc(instr.src_bytes());
            instr.dst_base = alloc(instr.dst_bytes());
        }

        MemoryPoolImage pool(geom.total_capacity());
        // float-valued fill keeps reductions NaN-free, so bitwise comparison
        // is meaningful
        for (std::uint64_t a = 0; a + 4 <= cursor; a += 4) {
            const float v =
                static_cast<float>(static_cast<std::int64_t>(rng() >> 11)) *
                0x1p-52f;
            pool.write_f32(a, v);
        }
        if (instr.opcode == Opcode::Gather) {
            for (std::uint32_t b = 0; b < instr.batch_size; ++b) {
                pool.write_u32(instr.index_base + b * 4,
                               static_cast<std::uint32_t>(rng() % rows));
            }
        }

        ReferencePool ref(geom.total_capacity());
        ref.store(0, pool.data(), pool.capacity());
        ref.apply(instr);

        MemoryPoolImage flat(geom.total_capacity());
        std::memcpy(flat.data(), pool.data(), pool.capacity());
        execute(flat, instr);

        MemoryPoolImage parted(geom.total_capacity());
        std::memcpy(parted.data(), pool.data(), pool.capacity());
        const DramTimingParams dram;
        const NmpCoreConfig core;
        for (std::uint32_t r = 0; r < R; ++r) {
            const RankWorkItem work = lower_instruction(geom, parted, instr, r);
            execute_on_rank(parted, geom, work, dram, core);
        }
        if (inject_fault && c == 0) {
            parted.data()[instr.dst_base] ^= 0x01;
        }

        const auto first_mismatch = [&](const std::uint8_t* got) {
            for (std::uint64_t a = 0; a < geom.total_capacity(); ++a) {
                if (got[a] != ref.bytes()[a]) return a;
            }
            return geom.total_capacity();
        };
        bool failed = false;
        if (std::uint64_t a = first_mismatch(flat.data());
            a < geom.total_capacity()) {
            dump_case(report.log, c, geom, instr, "flat", a);
            failed = true;
        }
        if (std::uint64_t a = first_mismatch(parted.data());
            a < geom.total_capacity()) {
            dump_case(report.log, c, geom, instr, "partitioned", a);
            failed = true;
        }
        if (failed) ++report.failures;
        ++report.cases;
    }
    return report;
}

}  // namespace nmpsim
