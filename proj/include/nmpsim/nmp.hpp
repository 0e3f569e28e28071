#pragma once

#include <cstdint>
#include <vector>

#include "nmpsim/addrmap.hpp"
#include "nmpsim/dram.hpp"
#include "nmpsim/isa.hpp"

namespace nmpsim {

// One TensorDIMM's NMP core: a 16-wide vector ALU fed by two 512 B input
// SRAM queues (A, B) and drained through a 512 B output queue, sized to the
// bandwidth-delay product of the rank (25.6 GB/s x 20 ns = 512 B).
struct NmpCoreConfig {
    std::uint32_t alu_lanes = 16;
    std::uint32_t alu_clock_mhz = 150;
    std::uint32_t input_queue_bytes = 512;  // per operand stream
    std::uint32_t output_queue_bytes = 512;
    std::uint32_t fill_latency_ns = 20;

    double alu_throughput_gbs() const {
        return alu_lanes * 4.0 * alu_clock_mhz / 1000.0;
    }
};

// Throws ConfigError if the queues are smaller than the bandwidth-delay
// product of the rank they stage for.
void validate(const NmpCoreConfig& core, const DramTimingParams& dram);

// The slice of one broadcast instruction owned by a single rank: the
// rank-local reads of source blocks it holds plus the writes of the
// destination blocks it holds (and, for GATHER, its share of the index
// buffer reads).
struct RankWorkItem {
    TensorInstruction instruction;
    std::uint32_t rank_id = 0;
    std::vector<BlockRequest> requests;
    std::uint64_t dst_bytes_owned = 0;
    std::uint64_t read_bytes = 0;
    std::uint64_t write_bytes = 0;
};

// Decodes the broadcast instruction into this rank's block-request program,
// in streaming order (index reads, then source reads, then destination
// writes). GATHER source addresses depend on the index values, so the pool
// image is consulted for the index buffer contents.
RankWorkItem lower_instruction(const PoolGeometry& geom,
                               const MemoryPoolImage& pool,
                               const TensorInstruction& instr,
                               std::uint32_t rank_id);

struct NmpExecResult {
    RankSimResult dram;
    double dram_ns = 0.0;
    double alu_ns = 0.0;
    double total_ns = 0.0;  // max(dram_ns, alu_ns)
    bool alu_bound = false;
    double queue_peak_bytes = 0.0;  // per operand stream
};

// Commits this rank's slice of the functional result to the pool and
// accounts its cycles: max of the DRAM-limited time and the ALU-limited
// time (both ends stream, so the max-rate bound is exact in steady state).
NmpExecResult execute_on_rank(MemoryPoolImage& pool, const PoolGeometry& geom,
                              const RankWorkItem& work,
                              const DramTimingParams& dram_params,
                              const NmpCoreConfig& core);

}  // namespace nmpsim
