#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "nmpsim/nmp.hpp"
#include "nmpsim/workload.hpp"

namespace nmpsim {

struct LinkSpec {
    std::string name = "NVLINK";
    double bandwidth_gbs = 150.0;
    double fixed_latency_us = 5.0;
};

// fixed_latency + bytes / bandwidth, in microseconds.
double transfer_time_us(const LinkSpec& link, std::uint64_t bytes);

enum class DesignKind : std::uint8_t {
    CpuOnly,    // CPU memory + CPU DNN
    CpuGpu,     // CPU lookup, PCIe copy, GPU reduce+DNN
    PooledMem,  // pooled memory without NMP, NVLINK, GPU reduce+DNN
    TensorDimm, // NMP lookup+reduce, NVLINK copy of the reduced tensor
    GpuOracle,  // everything in GPU local memory
};

const char* to_string(DesignKind kind);
DesignKind parse_design(const std::string& name);

struct SimReport {
    double total_ns = 0.0;
    double lookup_ns = 0.0;  // GATHER instructions
    double reduce_ns = 0.0;  // REDUCE/AVERAGE instructions
    std::uint64_t bytes_moved = 0;
    double agg_bandwidth_gbs = 0.0;
    double row_hit_rate = 0.0;  // request-weighted across ranks
    double queue_peak_bytes = 0.0;
    bool alu_bound = false;
    std::uint64_t instructions = 0;
};

// Broadcasts each instruction to all R ranks, executes the rank slices, and
// advances node time by the slowest rank (barrier per instruction: REDUCE
// consumes GATHER output). The functional pool state is identical to
// applying the isa semantics sequentially.
SimReport run_tensornode(const PoolGeometry& geom,
                         const DramTimingParams& dram_params,
                         const NmpCoreConfig& core,
                         std::span<const TensorInstruction> instrs,
                         MemoryPoolImage& pool);

// Conventional CPU memory system: `channels` independent channels, each
// time-multiplexed across dimms_per_channel DIMMs. Blocks interleave across
// channels; aggregate bandwidth is capped by channels x channel peak no
// matter how many DIMMs are populated.
struct CpuSystemConfig {
    std::uint32_t channels = 8;
    std::uint32_t dimms_per_channel = 4;
};

SimReport run_cpu_baseline(const CpuSystemConfig& cpu,
                           const DramTimingParams& dram_params,
                           std::span<const TensorInstruction> instrs,
                           MemoryPoolImage& pool);

struct LatencyBreakdown {
    double t_lookup_us = 0.0;
    double t_reduce_us = 0.0;
    double t_transfer_us = 0.0;
    double t_dnn_us = 0.0;
    double total_us = 0.0;
    // memory-system observables of the phase that dominates the design
    double agg_bandwidth_gbs = 0.0;
    double row_hit_rate = 0.0;
};

// External calibration inputs: DNN execution times measured (or assumed)
// per platform. The shipped defaults are synthetic.
struct DnnTimeTable {
    double cpu_us = 4000.0;              // CPU_ONLY
    double gpu_us = 120.0;               // TDIMM / GPU_ORACLE
    double gpu_with_reduce_us = 130.0;   // CPU_GPU / PMEM (reduce folded in)
};

struct DesignPointInputs {
    PoolGeometry geom;
    DramTimingParams dram;
    NmpCoreConfig core;
    CpuSystemConfig cpu;
    LinkSpec pcie{"PCIe", 16.0, 10.0};
    LinkSpec nvlink{"NVLINK", 150.0, 5.0};
    double gpu_local_bw_gbs = 900.0;
    DnnTimeTable t_dnn;
};

// Evaluates one design point over a generated instruction stream. Phase
// times are averaged per inference. The pool is mutated (idempotently) by
// the designs that run a memory simulation.
LatencyBreakdown evaluate_design(DesignKind kind, const DesignPointInputs& in,
                                 const InstructionStream& stream,
                                 MemoryPoolImage& pool);

}  // namespace nmpsim
