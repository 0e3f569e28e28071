// Python bindings for the nmpsim core: instruction encoding/execution,
// rank timing, workload generation, design-point evaluation, and the
// experiment driver.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nmpsim/experiment.hpp"

namespace py = pybind11;
using namespace nmpsim;

PYBIND11_MODULE(_nmpsim, m) {
    m.doc() = "near-memory embedding-layer simulator";

    py::register_exception<SimError>(m, "SimError");

    py::enum_<Opcode>(m, "Opcode")
        .value("GATHER", Opcode::Gather)
        .value("REDUCE", Opcode::Reduce)
        .value("AVERAGE", Opcode::Average);

    py::enum_<DesignKind>(m, "DesignKind")
        .value("CPU_ONLY", DesignKind::CpuOnly)
        .value("CPU_GPU", DesignKind::CpuGpu)
        .value("PMEM", DesignKind::PooledMem)
        .value("TDIMM", DesignKind::TensorDimm)
        .value("GPU_ORACLE", DesignKind::GpuOracle);

    py::enum_<IndexDistribution>(m, "IndexDistribution")
        .value("UNIFORM", IndexDistribution::Uniform)
        .value("ZIPF", IndexDistribution::Zipf)
        .value("SEQUENTIAL", IndexDistribution::Sequential);

    py::class_<TensorInstruction>(m, "TensorInstruction")
        .def(py::init<>())
        .def_readwrite("opcode", &TensorInstruction::opcode)
        .def_readwrite("dst_base", &TensorInstruction::dst_base)
        .def_readwrite("src_base", &TensorInstruction::src_base)
        .def_readwrite("index_base", &TensorInstruction::index_base)
        .def_readwrite("batch_size", &TensorInstruction::batch_size)
        .def_readwrite("embedding_bytes", &TensorInstruction::embedding_bytes)
        .def_readwrite("num_inputs", &TensorInstruction::num_inputs)
        .def("tensor_bytes", &TensorInstruction::tensor_bytes)
        .def("__eq__",
             [](const TensorInstruction& a, const TensorInstruction& b) {
                 return a == b;
             });

    m.def("encode_hex",
          [](const TensorInstruction& i) { return to_hex(encode(i)); });
    m.def("decode_hex",
          [](const std::string& text) { return decode(parse_hex(text)); });

    py::class_<MemoryPoolImage>(m, "MemoryPoolImage")
        .def(py::init<std::uint64_t>())
        .def("capacity", &MemoryPoolImage::capacity)
        .def("read_u32", &MemoryPoolImage::read_u32)
        .def("write_u32", &MemoryPoolImage::write_u32)
        .def("read_f32", &MemoryPoolImage::read_f32)
        .def("write_f32", &MemoryPoolImage::write_f32)
        .def("read_bytes",
             [](const MemoryPoolImage& p, std::uint64_t addr,
                std::uint64_t len) {
                 auto v = p.view(addr, len);
                 return py::bytes(reinterpret_cast<const char*>(v.data()),
                                  v.size());
             })
        .def("write_bytes", [](MemoryPoolImage& p, std::uint64_t addr,
                               const py::bytes& data) {
            std::string s = data;
            p.write(addr, {reinterpret_cast<const std::uint8_t*>(s.data()),
                           s.size()});
        });

    m.def("execute", &execute, py::arg("pool"), py::arg("instr"));

    py::class_<PoolGeometry>(m, "PoolGeometry")
        .def(py::init<std::uint32_t, std::uint64_t>(), py::arg("num_ranks"),
             py::arg("rank_capacity_bytes"))
        .def_readwrite("num_ranks", &PoolGeometry::num_ranks)
        .def_readwrite("rank_capacity_bytes", &PoolGeometry::rank_capacity_bytes)
        .def("total_capacity", &PoolGeometry::total_capacity);

    m.def("map_block", [](const PoolGeometry& g, std::uint64_t addr) {
        const BlockLocation loc = map_block(g, addr);
        return py::make_tuple(loc.rank_id, loc.local_byte_addr);
    });

    py::class_<DramTimingParams>(m, "DramTimingParams")
        .def(py::init<>())
        .def_readwrite("data_rate_mts", &DramTimingParams::data_rate_mts)
        .def_readwrite("CL", &DramTimingParams::CL)
        .def_readwrite("tRCD", &DramTimingParams::tRCD)
        .def_readwrite("refresh_enabled", &DramTimingParams::refresh_enabled)
        .def("peak_bandwidth_gbs", &DramTimingParams::peak_bandwidth_gbs);

    py::class_<NmpCoreConfig>(m, "NmpCoreConfig")
        .def(py::init<>())
        .def_readwrite("alu_lanes", &NmpCoreConfig::alu_lanes)
        .def_readwrite("alu_clock_mhz", &NmpCoreConfig::alu_clock_mhz)
        .def("alu_throughput_gbs", &NmpCoreConfig::alu_throughput_gbs);

    py::class_<BenchmarkConfig>(m, "BenchmarkConfig")
        .def(py::init<>())
        .def_readwrite("name", &BenchmarkConfig::name)
        .def_readwrite("num_tables", &BenchmarkConfig::num_tables)
        .def_readwrite("max_reduction", &BenchmarkConfig::max_reduction)
        .def_readwrite("embedding_dim", &BenchmarkConfig::embedding_dim)
        .def_readwrite("rows_per_table", &BenchmarkConfig::rows_per_table)
        .def_readwrite("batch_size", &BenchmarkConfig::batch_size)
        .def_readwrite("index_distribution",
                       &BenchmarkConfig::index_distribution)
        .def_readwrite("multi_hot", &BenchmarkConfig::multi_hot);

    m.def("benchmark_preset", &benchmark_preset);
    m.def("benchmark_preset_names", &benchmark_preset_names);
    m.def("footprint_bytes", &footprint_bytes, py::arg("rows"),
          py::arg("embedding_dim"), py::arg("num_tables"));

    py::class_<InstructionStream>(m, "InstructionStream")
        .def_readonly("instrs", &InstructionStream::instrs)
        .def_readonly("gathered_bytes_per_inference",
                      &InstructionStream::gathered_bytes_per_inference)
        .def_readonly("reduced_bytes_per_inference",
                      &InstructionStream::reduced_bytes_per_inference);

    m.def("build_stream", &build_stream, py::arg("cfg"), py::arg("geom"),
          py::arg("pool"), py::arg("seed"), py::arg("inferences") = 1,
          py::arg("fill_tables") = true);

    py::class_<SimReport>(m, "SimReport")
        .def_readonly("total_ns", &SimReport::total_ns)
        .def_readonly("lookup_ns", &SimReport::lookup_ns)
        .def_readonly("reduce_ns", &SimReport::reduce_ns)
        .def_readonly("bytes_moved", &SimReport::bytes_moved)
        .def_readonly("agg_bandwidth_gbs", &SimReport::agg_bandwidth_gbs)
        .def_readonly("row_hit_rate", &SimReport::row_hit_rate)
        .def_readonly("alu_bound", &SimReport::alu_bound);

    m.def("run_tensornode",
          [](const PoolGeometry& g, const DramTimingParams& d,
             const NmpCoreConfig& c, const std::vector<TensorInstruction>& is,
             MemoryPoolImage& pool) {
              return run_tensornode(g, d, c, is, pool);
          });

    py::class_<CpuSystemConfig>(m, "CpuSystemConfig")
        .def(py::init<>())
        .def_readwrite("channels", &CpuSystemConfig::channels)
        .def_readwrite("dimms_per_channel", &CpuSystemConfig::dimms_per_channel);

    m.def("run_cpu_baseline",
          [](const CpuSystemConfig& cpu, const DramTimingParams& d,
             const std::vector<TensorInstruction>& is, MemoryPoolImage& pool) {
              return run_cpu_baseline(cpu, d, is, pool);
          });

    py::class_<LinkSpec>(m, "LinkSpec")
        .def(py::init<>())
        .def_readwrite("name", &LinkSpec::name)
        .def_readwrite("bandwidth_gbs", &LinkSpec::bandwidth_gbs)
        .def_readwrite("fixed_latency_us", &LinkSpec::fixed_latency_us);

    m.def("transfer_time_us", &transfer_time_us);

    py::class_<DnnTimeTable>(m, "DnnTimeTable")
        .def(py::init<>())
        .def_readwrite("cpu_us", &DnnTimeTable::cpu_us)
        .def_readwrite("gpu_us", &DnnTimeTable::gpu_us)
        .def_readwrite("gpu_with_reduce_us", &DnnTimeTable::gpu_with_reduce_us);

    py::class_<DesignPointInputs>(m, "DesignPointInputs")
        .def(py::init<>())
        .def_readwrite("geom", &DesignPointInputs::geom)
        .def_readwrite("dram", &DesignPointInputs::dram)
        .def_readwrite("core", &DesignPointInputs::core)
        .def_readwrite("cpu", &DesignPointInputs::cpu)
        .def_readwrite("pcie", &DesignPointInputs::pcie)
        .def_readwrite("nvlink", &DesignPointInputs::nvlink)
        .def_readwrite("gpu_local_bw_gbs", &DesignPointInputs::gpu_local_bw_gbs)
        .def_readwrite("t_dnn", &DesignPointInputs::t_dnn);

    m.def("evaluate_design", &evaluate_design, py::arg("kind"),
          py::arg("inputs"), py::arg("stream"), py::arg("pool"));

    py::class_<LatencyBreakdown>(m, "LatencyBreakdown")
        .def_readonly("t_lookup_us", &LatencyBreakdown::t_lookup_us)
        .def_readonly("t_reduce_us", &LatencyBreakdown::t_reduce_us)
        .def_readonly("t_transfer_us", &LatencyBreakdown::t_transfer_us)
        .def_readonly("t_dnn_us", &LatencyBreakdown::t_dnn_us)
        .def_readonly("total_us", &LatencyBreakdown::total_us)
        .def_readonly("agg_bandwidth_gbs", &LatencyBreakdown::agg_bandwidth_gbs);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init(&default_experiment))
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("batches", &ExperimentConfig::batches);

    m.def("default_experiment", &default_experiment);
    m.def("load_experiment", &load_experiment);
    m.def("dump_experiment", &dump_experiment);
    m.def("run_experiment", &run_experiment);
    m.def("run_validation",
          [](std::uint64_t seed, std::uint64_t cases, bool inject_fault) {
              const ValidationReport r = run_validation(seed, cases, inject_fault);
              return py::make_tuple(r.cases, r.failures, r.log);
          },
          py::arg("seed"), py::arg("cases"), py::arg("inject_fault") = false);
}
