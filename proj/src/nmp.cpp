#include "nmpsim/nmp.hpp"

#include <algorithm>
#include <cstring>

namespace nmpsim {

void validate(const NmpCoreConfig& core, const DramTimingParams& dram) {
    if (core.alu_lanes == 0 || core.alu_clock_mhz == 0) {
        throw ConfigError("ALU lanes and clock must be positive");
    }
    const double bdp = dram.peak_bandwidth_gbs() * core.fill_latency_ns;
    if (core.input_queue_bytes < bdp || core.output_queue_bytes < bdp) {
        throw ConfigError(
            "SRAM queues must cover the bandwidth-delay product (" +
            std::to_string(bdp) + " bytes)");
    }
}

namespace {

void require_aligned(std::uint64_t addr, const char* what) {
    if (addr % kBlockBytes != 0) {
        throw AddressFaultError(std::string(what) + " address " +
                                std::to_string(addr) +
                                " is not 64-byte aligned");
    }
}

}  // namespace

RankWorkItem lower_instruction(const PoolGeometry& geom,
                               const MemoryPoolImage& pool,
                               const TensorInstruction& instr,
                               std::uint32_t rank_id) {
    if (rank_id >= geom.num_ranks) {
        throw AddressFaultError("rank_id " + std::to_string(rank_id) +
                                " >= num_ranks");
    }
    require_aligned(instr.dst_base, "destination");
    require_aligned(instr.src_base, "source");
    if (instr.dst_bytes() == 0) {
        throw AddressFaultError("empty destination");
    }
    const std::uint64_t cap =
        std::min<std::uint64_t>(geom.total_capacity(), pool.capacity());
    const auto check = [&](std::uint64_t base, std::uint64_t len) {
        if (len > cap || base > cap - len) {
            throw AddressFaultError("instruction range [" +
                                    std::to_string(base) + ", +" +
                                    std::to_string(len) + ") exceeds capacity");
        }
    };
    check(instr.dst_base, instr.dst_bytes());

    RankWorkItem work;
    work.instruction = instr;
    work.rank_id = rank_id;
    std::uint64_t order = 0;
    const auto emit = [&](RequestKind kind, std::uint64_t pool_addr) {
        const BlockLocation loc = map_block(geom, pool_addr);
        if (loc.rank_id != rank_id) return;
        work.requests.push_back({kind, loc.local_byte_addr, order++});
        if (kind == RequestKind::Read) {
            work.read_bytes += kBlockBytes;
        } else {
            work.write_bytes += kBlockBytes;
        }
    };

    const std::uint64_t eb = instr.embedding_bytes;
    const std::uint64_t blocks_per_emb = eb / kBlockBytes;

    if (instr.opcode == Opcode::Gather) {
        const std::uint64_t idx_bytes = std::uint64_t{instr.batch_size} * 4;
        check(instr.index_base, idx_bytes);
        check(instr.src_base, 0);  // rows checked per index below
        // index buffer reads (this rank's share of the broadcast prefetch)
        const std::uint64_t idx_first = instr.index_base / kBlockBytes;
        const std::uint64_t idx_last =
            (instr.index_base + idx_bytes + kBlockBytes - 1) / kBlockBytes;
        for (std::uint64_t blk = idx_first; blk < idx_last; ++blk) {
            emit(RequestKind::Read, blk * kBlockBytes);
        }
        // table row reads, streaming in batch order
        for (std::uint32_t b = 0; b < instr.batch_size; ++b) {
            const std::uint32_t idx = pool.read_u32(instr.index_base + b * 4ull);
            const std::uint64_t row_base = instr.src_base + std::uint64_t{idx} * eb;
            check(row_base, eb);
            for (std::uint64_t j = 0; j < blocks_per_emb; ++j) {
                emit(RequestKind::Read, row_base + j * kBlockBytes);
            }
        }
    } else {
        check(instr.src_base, instr.src_bytes());
        // input-major accumulation passes: stream input i's blocks in k
        // order, folding into the rank-local accumulation region, then move
        // to input i+1. Keeps each bank's request queue row-local.
        const std::uint64_t dst_blocks = instr.dst_bytes() / kBlockBytes;
        const std::uint64_t tensor_bytes = instr.tensor_bytes();
        for (std::uint32_t i = 0; i < instr.num_inputs; ++i) {
            for (std::uint64_t k = 0; k < dst_blocks; ++k) {
                emit(RequestKind::Read,
                     instr.src_base + i * tensor_bytes + k * kBlockBytes);
            }
        }
    }
    // destination write drain
    const std::uint64_t dst_blocks = instr.dst_bytes() / kBlockBytes;
    for (std::uint64_t k = 0; k < dst_blocks; ++k) {
        const std::uint64_t addr = instr.dst_base + k * kBlockBytes;
        if (rank_of(geom, addr) == rank_id) work.dst_bytes_owned += kBlockBytes;
        emit(RequestKind::Write, addr);
    }
    return work;
}

namespace {

// Computes the functional value of one destination block and writes it.
void commit_dst_block(MemoryPoolImage& pool, const TensorInstruction& instr,
                      std::uint64_t k) {
    const std::uint64_t eb = instr.embedding_bytes;
    const std::uint64_t dst_addr = instr.dst_base + k * kBlockBytes;
    if (instr.opcode == Opcode::Gather) {
        const std::uint64_t blocks_per_emb = eb / kBlockBytes;
        const std::uint64_t b = k / blocks_per_emb;
        const std::uint64_t j = k % blocks_per_emb;
        const std::uint32_t idx = pool.read_u32(instr.index_base + b * 4);
        const auto src =
            pool.view(instr.src_base + std::uint64_t{idx} * eb + j * kBlockBytes,
                      kBlockBytes);
        std::memcpy(pool.data() + dst_addr, src.data(), kBlockBytes);
        return;
    }
    const std::uint64_t tensor_bytes = instr.tensor_bytes();
    const float inv_n = 1.0f / static_cast<float>(instr.num_inputs);
    float acc[kBlockBytes / 4];
    std::memcpy(acc, pool.data() + instr.src_base + k * kBlockBytes, kBlockBytes);
    for (std::uint32_t i = 1; i < instr.num_inputs; ++i) {
        float in[kBlockBytes / 4];
        std::memcpy(in,
                    pool.data() + instr.src_base + i * tensor_bytes +
                        k * kBlockBytes,
                    kBlockBytes);
        for (unsigned e = 0; e < kBlockBytes / 4; ++e) acc[e] += in[e];
    }
    if (instr.opcode == Opcode::Average) {
        for (unsigned e = 0; e < kBlockBytes / 4; ++e) acc[e] *= inv_n;
    }
    std::memcpy(pool.data() + dst_addr, acc, kBlockBytes);
}

}  // namespace

NmpExecResult execute_on_rank(MemoryPoolImage& pool, const PoolGeometry& geom,
                              const RankWorkItem& work,
                              const DramTimingParams& dram_params,
                              const NmpCoreConfig& core) {
    const TensorInstruction& instr = work.instruction;
    pool.check_range(instr.dst_base, instr.dst_bytes());

    // functional slice: this rank's destination blocks only
    const std::uint64_t dst_blocks = instr.dst_bytes() / kBlockBytes;
    for (std::uint64_t k = 0; k < dst_blocks; ++k) {
        if (rank_of(geom, instr.dst_base + k * kBlockBytes) != work.rank_id) {
            continue;
        }
        commit_dst_block(pool, instr, k);
    }

    NmpExecResult res;
    res.dram = simulate_rank(dram_params, work.requests);
    res.dram_ns = res.dram.total_ns(dram_params);
    if (instr.opcode != Opcode::Gather) {
        // The vector ALU consumes each operand stream at lanes*4B*clock;
        // the per-stream slice is one input tensor's share on this rank.
        res.alu_ns = static_cast<double>(work.dst_bytes_owned) /
                     core.alu_throughput_gbs();
    }
    res.total_ns = std::max(res.dram_ns, res.alu_ns);
    res.alu_bound = res.alu_ns > res.dram_ns;

    // bandwidth-delay staging: an input queue holds at most its fill rate
    // times the fill latency
    if (res.total_ns > 0 && work.read_bytes > 0) {
        double read_rate_gbs = static_cast<double>(work.read_bytes) / res.total_ns;
        read_rate_gbs = std::min(read_rate_gbs, dram_params.peak_bandwidth_gbs());
        const double streams = instr.opcode == Opcode::Gather ? 1.0 : 2.0;
        res.queue_peak_bytes = read_rate_gbs / streams * core.fill_latency_ns;
    }
    return res;
}

}  // namespace nmpsim
