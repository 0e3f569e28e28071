#include "nmpsim/workload.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <random>

#include "nmpsim/errors.hpp"

namespace nmpsim {

BenchmarkConfig benchmark_preset(const std::string& name) {
    BenchmarkConfig cfg;
    cfg.name = name;
    if (name == "NCF") {
        cfg.num_tables = 4;
        cfg.max_reduction = 2;
        cfg.multi_hot = false;  // one lookup per table, reduced across pairs
        cfg.reduce_op = Opcode::Reduce;
        cfg.fc_layers = 4;
    } else if (name == "YouTube") {
        cfg.num_tables = 2;
        cfg.max_reduction = 50;
        cfg.multi_hot = true;
        cfg.reduce_op = Opcode::Average;
        cfg.fc_layers = 4;
    } else if (name == "Fox") {
        cfg.num_tables = 2;
        cfg.max_reduction = 50;
        cfg.multi_hot = true;
        cfg.reduce_op = Opcode::Average;
        cfg.fc_layers = 1;
    } else if (name == "Facebook") {
        cfg.num_tables = 8;
        cfg.max_reduction = 25;
        cfg.multi_hot = true;
        cfg.reduce_op = Opcode::Reduce;
        cfg.fc_layers = 6;
    } else {
        throw ConfigError("unknown benchmark preset '" + name + "'");
    }
    return cfg;
}

std::vector<std::string> benchmark_preset_names() {
    return {"NCF", "YouTube", "Fox", "Facebook"};
}

void validate(const BenchmarkConfig& cfg) {
    if (cfg.num_tables == 0 || cfg.rows_per_table == 0) {
        throw ConfigError("benchmark needs at least one table with rows");
    }
    if (cfg.embedding_dim == 0 || (cfg.embedding_dim * 4) % kBlockBytes != 0 ||
        !std::has_single_bit(cfg.embedding_dim * 4 / kBlockBytes)) {
        throw ConfigError(
            "embedding_dim * 4 must be a power-of-two multiple of 64 bytes");
    }
    if (cfg.batch_size == 0 || !std::has_single_bit(cfg.batch_size)) {
        throw ConfigError("batch_size must be a power of two (wire format)");
    }
    if (cfg.max_reduction < 2 || cfg.max_reduction > 255) {
        throw ConfigError("max_reduction must be in [2, 255]");
    }
    if (!cfg.multi_hot && cfg.num_tables % 2 != 0) {
        throw ConfigError(
            "pairwise reduction plan needs an even number of tables");
    }
    if (!cfg.multi_hot && cfg.max_reduction != 2) {
        throw ConfigError("pairwise reduction plan implies max_reduction == 2");
    }
    if (cfg.index_distribution == IndexDistribution::Zipf && cfg.zipf_s <= 0) {
        throw ConfigError("zipf exponent must be positive");
    }
}

namespace {

class IndexSampler {
public:
    IndexSampler(const BenchmarkConfig& cfg, std::uint64_t seed)
        : cfg_(cfg), rng_(seed) {
        if (cfg.index_distribution == IndexDistribution::Zipf) {
            std::vector<double> w(cfg.rows_per_table);
            for (std::uint64_t k = 0; k < cfg.rows_per_table; ++k) {
                w[k] = 1.0 / std::pow(static_cast<double>(k + 1), cfg.zipf_s);
            }
            zipf_ = std::discrete_distribution<std::uint64_t>(w.begin(), w.end());
        }
    }

    std::uint32_t next() {
        switch (cfg_.index_distribution) {
            case IndexDistribution::Uniform:
                return static_cast<std::uint32_t>(
                    std::uniform_int_distribution<std::uint64_t>(
                        0, cfg_.rows_per_table - 1)(rng_));
            case IndexDistribution::Zipf:
                return static_cast<std::uint32_t>(zipf_(rng_));
            case IndexDistribution::Sequential:
                return static_cast<std::uint32_t>(counter_++ %
                                                  cfg_.rows_per_table);
        }
        return 0;
    }

private:
    const BenchmarkConfig& cfg_;
    std::mt19937_64 rng_;
    std::discrete_distribution<std::uint64_t> zipf_;
    std::uint64_t counter_ = 0;
};

// Cheap deterministic table fill (splitmix64 mapped into [-1, 1)).
float fill_value(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    x ^= x >> 31;
    return static_cast<float>(static_cast<std::int64_t>(x >> 11)) * 0x1p-52f;
}

}  // namespace

InstructionStream build_stream(const BenchmarkConfig& cfg,
                               const PoolGeometry& geom, MemoryPoolImage& pool,
                               std::uint64_t seed, std::uint32_t inferences,
                               bool fill_tables) {
    validate(cfg);
    validate(geom);
    if (inferences == 0) {
        throw ConfigError("inferences must be >= 1");
    }

    const std::uint64_t eb = cfg.embedding_bytes();
    const std::uint64_t align = std::uint64_t{geom.num_ranks} * kBlockBytes;
    const std::uint32_t lookups =
        cfg.multi_hot ? cfg.max_reduction : 1;  // L per table
    const std::uint64_t gather_batch =
        std::uint64_t{cfg.batch_size} * lookups;
    if (gather_batch > 0xFFFF) {
        throw ConfigError("batch_size x lookups exceeds the 16-bit batch field");
    }
    const std::uint64_t table_bytes = cfg.rows_per_table * eb;
    const std::uint64_t gather_region = gather_batch * eb;  // per table
    const std::uint32_t outputs =
        cfg.multi_hot ? cfg.num_tables : cfg.num_tables / 2;

    std::uint64_t cursor = 0;
    const auto alloc = [&](std::uint64_t bytes) {
        const std::uint64_t base = (cursor + align - 1) / align * align;
        cursor = base + bytes;
        if (cursor > pool.capacity()) {
            throw ConfigError("workload does not fit the pool (needs " +
                              std::to_string(cursor) + " bytes, capacity " +
                              std::to_string(pool.capacity()) + ")");
        }
        return base;
    };

    std::vector<std::uint64_t> table_base(cfg.num_tables);
    for (std::uint32_t t = 0; t < cfg.num_tables; ++t) {
        table_base[t] = alloc(table_bytes);
    }
    // gather destinations are laid out back to back so that reduction
    // inputs are contiguous (within a table for multi-hot, across a table
    // pair otherwise)
    const std::uint64_t gather_base = alloc(gather_region * cfg.num_tables);
    const std::uint64_t reduce_base =
        alloc(std::uint64_t{outputs} * cfg.batch_size * eb);
    const std::uint64_t index_stride =
        (gather_batch * 4 + align - 1) / align * align;
    const std::uint64_t index_base =
        alloc(index_stride * cfg.num_tables * inferences);

    if (fill_tables) {
        float* f = reinterpret_cast<float*>(pool.data());
        for (std::uint32_t t = 0; t < cfg.num_tables; ++t) {
            const std::uint64_t first = table_base[t] / 4;
            const std::uint64_t count = table_bytes / 4;
            for (std::uint64_t e = 0; e < count; ++e) {
                f[first + e] = fill_value(seed ^ (t * 0x10001ull) ^ e);
            }
        }
    }

    IndexSampler sampler(cfg, seed);
    InstructionStream stream;
    stream.table_rows = cfg.rows_per_table;
    stream.inferences = inferences;
    stream.gathered_bytes_per_inference =
        std::uint64_t{cfg.num_tables} * gather_batch * eb;
    stream.reduced_bytes_per_inference =
        std::uint64_t{outputs} * cfg.batch_size * eb;

    for (std::uint32_t inf = 0; inf < inferences; ++inf) {
        for (std::uint32_t t = 0; t < cfg.num_tables; ++t) {
            const std::uint64_t ibase =
                index_base +
                (std::uint64_t{inf} * cfg.num_tables + t) * index_stride;
            // lookup l of batch item b lands at tensor slot l, position b,
            // so the gathered region is L contiguous B-row tensors
            for (std::uint32_t l = 0; l < lookups; ++l) {
                for (std::uint32_t b = 0; b < cfg.batch_size; ++b) {
                    pool.write_u32(ibase + (std::uint64_t{l} * cfg.batch_size + b) * 4,
                                   sampler.next());
                }
            }
            TensorInstruction g;
            g.opcode = Opcode::Gather;
            g.dst_base = gather_base + t * gather_region;
            g.src_base = table_base[t];
            g.index_base = ibase;
            g.batch_size = static_cast<std::uint32_t>(gather_batch);
            g.embedding_bytes = static_cast<std::uint32_t>(eb);
            g.num_inputs = 1;
            stream.instrs.push_back(g);
        }
        for (std::uint32_t o = 0; o < outputs; ++o) {
            TensorInstruction r;
            r.opcode = cfg.reduce_op;
            r.dst_base = reduce_base + std::uint64_t{o} * cfg.batch_size * eb;
            r.src_base = cfg.multi_hot
                             ? gather_base + o * gather_region
                             : gather_base + std::uint64_t{o} * 2 * gather_region;
            r.batch_size = cfg.batch_size;
            r.embedding_bytes = static_cast<std::uint32_t>(eb);
            r.num_inputs = cfg.max_reduction;
            stream.instrs.push_back(r);
        }
    }
    return stream;
}

std::uint64_t footprint_bytes(std::uint64_t rows, std::uint64_t embedding_dim,
                              std::uint64_t num_tables) {
    if (rows == 0 || embedding_dim == 0 || num_tables == 0) {
        throw ConfigError("footprint arguments must all be >= 1");
    }
    return rows * embedding_dim * 4 * num_tables;
}

void ReferencePool::store(std::uint64_t addr, const std::uint8_t* src,
                          std::uint64_t len) {
    if (addr + len > bytes_.size()) {
        throw AddressFaultError("reference store out of range");
    }
    std::memcpy(bytes_.data() + addr, src, len);
}

void ReferencePool::apply(const TensorInstruction& instr) {
    const std::uint64_t eb = instr.embedding_bytes;
    if (instr.opcode == Opcode::Gather) {
        for (std::uint64_t b = 0; b < instr.batch_size; ++b) {
            std::uint32_t idx;
            std::memcpy(&idx, bytes_.data() + instr.index_base + b * 4, 4);
            for (std::uint64_t byte = 0; byte < eb; ++byte) {
                bytes_.at(instr.dst_base + b * eb + byte) =
                    bytes_.at(instr.src_base + std::uint64_t{idx} * eb + byte);
            }
        }
        return;
    }
    const std::uint64_t tensor_bytes = std::uint64_t{instr.batch_size} * eb;
    for (std::uint64_t e = 0; e < tensor_bytes / 4; ++e) {
        float acc = 0.0f;
        for (std::uint64_t i = 0; i < instr.num_inputs; ++i) {
            float v;
            std::memcpy(&v,
                        bytes_.data() + instr.src_base + i * tensor_bytes + e * 4,
                        4);
            if (i == 0) {
                acc = v;
            } else {
                acc += v;
            }
        }
        if (instr.opcode == Opcode::Average) {
            acc *= 1.0f / static_cast<float>(instr.num_inputs);
        }
        std::memcpy(bytes_.data() + instr.dst_base + e * 4, &acc, 4);
    }
}

}  // namespace nmpsim
