#include "nmpsim/node.hpp"

#include <algorithm>
#include <cmath>

#include "nmpsim/errors.hpp"

namespace nmpsim {

double transfer_time_us(const LinkSpec& link, std::uint64_t bytes) {
    if (link.bandwidth_gbs <= 0) {
        throw ConfigError("link bandwidth must be positive");
    }
    // bytes / (GB/s) = ns
    return link.fixed_latency_us +
           static_cast<double>(bytes) / link.bandwidth_gbs / 1000.0;
}

const char* to_string(DesignKind kind) {
    switch (kind) {
        case DesignKind::CpuOnly: return "CPU_ONLY";
        case DesignKind::CpuGpu: return "CPU_GPU";
        case DesignKind::PooledMem: return "PMEM";
        case DesignKind::TensorDimm: return "TDIMM";
        case DesignKind::GpuOracle: return "GPU_ORACLE";
    }
    return "?";
}

DesignKind parse_design(const std::string& name) {
    if (name == "CPU_ONLY") return DesignKind::CpuOnly;
    if (name == "CPU_GPU") return DesignKind::CpuGpu;
    if (name == "PMEM") return DesignKind::PooledMem;
    if (name == "TDIMM") return DesignKind::TensorDimm;
    if (name == "GPU_ORACLE") return DesignKind::GpuOracle;
    throw ConfigError("unknown design point '" + name + "'");
}

namespace {

struct PhaseAccum {
    double lookup_ns = 0.0;
    double reduce_ns = 0.0;
    std::uint64_t bytes = 0;
    std::uint64_t requests = 0;
    double hits = 0.0;
    double queue_peak = 0.0;
    bool alu_bound = false;

    void add_instr(Opcode op, double ns) {
        if (op == Opcode::Gather) {
            lookup_ns += ns;
        } else {
            reduce_ns += ns;
        }
    }

    SimReport finish(std::uint64_t instructions) const {
        SimReport rep;
        rep.lookup_ns = lookup_ns;
        rep.reduce_ns = reduce_ns;
        rep.total_ns = lookup_ns + reduce_ns;
        rep.bytes_moved = bytes;
        rep.agg_bandwidth_gbs =
            rep.total_ns > 0 ? static_cast<double>(bytes) / rep.total_ns : 0.0;
        rep.row_hit_rate = requests > 0 ? hits / requests : 0.0;
        rep.queue_peak_bytes = queue_peak;
        rep.alu_bound = alu_bound;
        rep.instructions = instructions;
        return rep;
    }
};

}  // namespace

SimReport run_tensornode(const PoolGeometry& geom,
                         const DramTimingParams& dram_params,
                         const NmpCoreConfig& core,
                         std::span<const TensorInstruction> instrs,
                         MemoryPoolImage& pool) {
    validate(geom);
    validate(dram_params);
    validate(core, dram_params);

    PhaseAccum acc;
    std::size_t index = 0;
    for (const TensorInstruction& instr : instrs) {
        double instr_ns = 0.0;
        try {
            for (std::uint32_t r = 0; r < geom.num_ranks; ++r) {
                const RankWorkItem work = lower_instruction(geom, pool, instr, r);
                const NmpExecResult res =
                    execute_on_rank(pool, geom, work, dram_params, core);
                instr_ns = std::max(instr_ns, res.total_ns);
                acc.bytes += res.dram.bytes_moved;
                const std::uint64_t reqs = res.dram.bytes_moved / kBlockBytes;
                acc.requests += reqs;
                acc.hits += res.dram.row_hit_rate * reqs;
                acc.queue_peak = std::max(acc.queue_peak, res.queue_peak_bytes);
                acc.alu_bound = acc.alu_bound || res.alu_bound;
            }
        } catch (SimError& e) {
            throw AddressFaultError("instruction " + std::to_string(index) +
                                    ": " + e.what());
        }
        acc.add_instr(instr.opcode, instr_ns);
        ++index;
    }
    return acc.finish(instrs.size());
}

SimReport run_cpu_baseline(const CpuSystemConfig& cpu,
                           const DramTimingParams& dram_params,
                           std::span<const TensorInstruction> instrs,
                           MemoryPoolImage& pool) {
    validate(dram_params);
    if (cpu.channels == 0 || cpu.dimms_per_channel == 0) {
        throw ConfigError("channels and dimms_per_channel must be positive");
    }
    // Flat geometry: one pseudo-rank owning every block, so the lowering
    // yields the full pool-physical request stream of the instruction.
    const PoolGeometry flat{
        1, (pool.capacity() + kBlockBytes - 1) / kBlockBytes * kBlockBytes};

    PhaseAccum acc;
    std::size_t index = 0;
    for (const TensorInstruction& instr : instrs) {
        double instr_ns = 0.0;
        try {
            const RankWorkItem work = lower_instruction(flat, pool, instr, 0);
            execute(pool, instr);
            // Stripe blocks across channels, then across the DIMMs sharing
            // each channel.
            std::vector<std::vector<std::vector<BlockRequest>>> per_channel(
                cpu.channels,
                std::vector<std::vector<BlockRequest>>(cpu.dimms_per_channel));
            for (const BlockRequest& r : work.requests) {
                const std::uint64_t block = r.rank_local_addr / kBlockBytes;
                const std::uint32_t ch =
                    static_cast<std::uint32_t>(block % cpu.channels);
                const std::uint64_t in_ch = block / cpu.channels;
                const std::uint32_t dimm =
                    static_cast<std::uint32_t>(in_ch % cpu.dimms_per_channel);
                const std::uint64_t local =
                    (in_ch / cpu.dimms_per_channel) * kBlockBytes;
                per_channel[ch][dimm].push_back({r.kind, local, r.issue_order});
            }
            for (std::uint32_t ch = 0; ch < cpu.channels; ++ch) {
                const RankSimResult res = simulate_shared_channel(
                    dram_params, cpu.dimms_per_channel, per_channel[ch]);
                instr_ns = std::max(instr_ns, res.total_ns(dram_params));
                acc.bytes += res.bytes_moved;
                const std::uint64_t reqs = res.bytes_moved / kBlockBytes;
                acc.requests += reqs;
                acc.hits += res.row_hit_rate * reqs;
            }
        } catch (SimError& e) {
            throw AddressFaultError("instruction " + std::to_string(index) +
                                    ": " + e.what());
        }
        acc.add_instr(instr.opcode, instr_ns);
        ++index;
    }
    return acc.finish(instrs.size());
}

LatencyBreakdown evaluate_design(DesignKind kind, const DesignPointInputs& in,
                                 const InstructionStream& stream,
                                 MemoryPoolImage& pool) {
    if (stream.inferences == 0) {
        throw ConfigError("instruction stream holds no inferences");
    }
    const double inv_inf = 1.0 / stream.inferences;
    const std::uint64_t gathered = stream.gathered_bytes_per_inference;
    const std::uint64_t reduced = stream.reduced_bytes_per_inference;

    LatencyBreakdown out;
    switch (kind) {
        case DesignKind::CpuOnly: {
            const SimReport rep =
                run_cpu_baseline(in.cpu, in.dram, stream.instrs, pool);
            out.t_lookup_us = rep.lookup_ns * inv_inf / 1000.0;
            out.t_reduce_us = rep.reduce_ns * inv_inf / 1000.0;
            out.t_dnn_us = in.t_dnn.cpu_us;
            out.agg_bandwidth_gbs = rep.agg_bandwidth_gbs;
            out.row_hit_rate = rep.row_hit_rate;
            break;
        }
        case DesignKind::CpuGpu: {
            // lookups on CPU memory; the pre-reduction tensors cross PCIe
            // and the reduction folds into the GPU-side DNN time
            std::vector<TensorInstruction> gathers;
            for (const auto& i : stream.instrs) {
                if (i.opcode == Opcode::Gather) gathers.push_back(i);
            }
            const SimReport rep =
                run_cpu_baseline(in.cpu, in.dram, gathers, pool);
            out.t_lookup_us = rep.lookup_ns * inv_inf / 1000.0;
            out.t_transfer_us = transfer_time_us(in.pcie, gathered);
            out.t_dnn_us = in.t_dnn.gpu_with_reduce_us;
            out.agg_bandwidth_gbs = rep.agg_bandwidth_gbs;
            out.row_hit_rate = rep.row_hit_rate;
            break;
        }
        case DesignKind::PooledMem: {
            // no NMP: the GPU gathers the raw embeddings through the link,
            // which is the bottleneck in front of the pooled DRAM
            out.t_lookup_us =
                static_cast<double>(gathered) / in.nvlink.bandwidth_gbs / 1000.0;
            out.t_transfer_us = transfer_time_us(in.nvlink, gathered);
            out.t_dnn_us = in.t_dnn.gpu_with_reduce_us;
            out.agg_bandwidth_gbs = in.nvlink.bandwidth_gbs;
            break;
        }
        case DesignKind::TensorDimm: {
            const SimReport rep = run_tensornode(in.geom, in.dram, in.core,
                                                 stream.instrs, pool);
            out.t_lookup_us = rep.lookup_ns * inv_inf / 1000.0;
            out.t_reduce_us = rep.reduce_ns * inv_inf / 1000.0;
            out.t_transfer_us = transfer_time_us(in.nvlink, reduced);
            out.t_dnn_us = in.t_dnn.gpu_us;
            out.agg_bandwidth_gbs = rep.agg_bandwidth_gbs;
            out.row_hit_rate = rep.row_hit_rate;
            break;
        }
        case DesignKind::GpuOracle: {
            out.t_lookup_us =
                static_cast<double>(gathered) / in.gpu_local_bw_gbs / 1000.0;
            out.t_reduce_us = static_cast<double>(gathered + reduced) /
                              in.gpu_local_bw_gbs / 1000.0;
            out.t_dnn_us = in.t_dnn.gpu_us;
            out.agg_bandwidth_gbs = in.gpu_local_bw_gbs;
            break;
        }
    }
    out.total_us =
        out.t_lookup_us + out.t_reduce_us + out.t_transfer_us + out.t_dnn_us;
    return out;
}

}  // namespace nmpsim
