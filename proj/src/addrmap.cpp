#include "nmpsim/addrmap.hpp"

#include <bit>

namespace nmpsim {

void validate(const PoolGeometry& geom) {
    if (geom.num_ranks < 1 || geom.num_ranks > 256 ||
        !std::has_single_bit(geom.num_ranks)) {
        throw ConfigError("num_ranks must be a power of two in [1, 256], got " +
                          std::to_string(geom.num_ranks));
    }
    if (geom.rank_capacity_bytes == 0 ||
        geom.rank_capacity_bytes % kBlockBytes != 0) {
        throw ConfigError("rank_capacity_bytes must be a positive multiple of 64");
    }
}

BlockLocation map_block(const PoolGeometry& geom, std::uint64_t addr) {
    if (addr % kBlockBytes != 0) {
        throw AddressFaultError("address " + std::to_string(addr) +
                                " is not 64-byte aligned");
    }
    if (addr >= geom.total_capacity()) {
        throw AddressFaultError("address " + std::to_string(addr) +
                                " exceeds pool capacity " +
                                std::to_string(geom.total_capacity()));
    }
    const std::uint64_t block = addr / kBlockBytes;
    return {static_cast<std::uint32_t>(block % geom.num_ranks),
            (block / geom.num_ranks) * kBlockBytes};
}

std::uint64_t unmap_block(const PoolGeometry& geom, const BlockLocation& loc) {
    if (loc.rank_id >= geom.num_ranks ||
        loc.local_byte_addr % kBlockBytes != 0 ||
        loc.local_byte_addr >= geom.rank_capacity_bytes) {
        throw AddressFaultError("invalid block location (rank " +
                                std::to_string(loc.rank_id) + ", local " +
                                std::to_string(loc.local_byte_addr) + ")");
    }
    const std::uint64_t local_block = loc.local_byte_addr / kBlockBytes;
    return (local_block * geom.num_ranks + loc.rank_id) * kBlockBytes;
}

std::vector<std::uint32_t> slices_per_rank(const PoolGeometry& geom,
                                           std::uint32_t embedding_bytes) {
    if (embedding_bytes % kBlockBytes != 0) {
        throw AddressFaultError("embedding_bytes must be a multiple of 64");
    }
    const std::uint32_t blocks = embedding_bytes / kBlockBytes;
    std::vector<std::uint32_t> counts(geom.num_ranks, 0);
    for (std::uint32_t b = 0; b < blocks; ++b) {
        counts[b % geom.num_ranks]++;
    }
    return counts;
}

}  // namespace nmpsim
