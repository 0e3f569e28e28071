#pragma once

#include <cstdint>
#include <vector>

#include "nmpsim/errors.hpp"
#include "nmpsim/pool.hpp"

namespace nmpsim {

// Geometry of the rank-interleaved pool: R DIMMs (one NMP core each),
// consecutive 64-byte blocks striped across ranks.
struct PoolGeometry {
    std::uint32_t num_ranks = 32;           // power of two, 1..256
    std::uint64_t rank_capacity_bytes = 0;  // per-rank DRAM capacity

    std::uint64_t total_capacity() const {
        return std::uint64_t{num_ranks} * rank_capacity_bytes;
    }
};

// Throws ConfigError if R is not a power of two in [1, 256] or the
// rank capacity is not block-aligned.
void validate(const PoolGeometry& geom);

struct BlockLocation {
    std::uint32_t rank_id = 0;
    std::uint64_t local_byte_addr = 0;  // 64-byte aligned
    bool operator==(const BlockLocation&) const = default;
};

// rank = (addr/64) mod R, local = ((addr/64) div R) * 64. Bijective over
// the pool; throws AddressFaultError on misalignment or overflow.
BlockLocation map_block(const PoolGeometry& geom, std::uint64_t addr);

// Inverse of map_block.
std::uint64_t unmap_block(const PoolGeometry& geom, const BlockLocation& loc);

// Rank of the block containing addr (addr need not be aligned).
inline std::uint32_t rank_of(const PoolGeometry& geom, std::uint64_t addr) {
    return static_cast<std::uint32_t>((addr / kBlockBytes) % geom.num_ranks);
}

// Number of 64-byte blocks of one embedding held by each rank, for an
// embedding starting at a block-aligned base. Counts differ by at most 1.
std::vector<std::uint32_t> slices_per_rank(const PoolGeometry& geom,
                                           std::uint32_t embedding_bytes);

}  // namespace nmpsim
