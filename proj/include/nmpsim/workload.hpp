#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nmpsim/addrmap.hpp"
#include "nmpsim/isa.hpp"

namespace nmpsim {

enum class IndexDistribution : std::uint8_t {
    Uniform,
    Zipf,
    Sequential,  // streaming lookups, for bandwidth studies
};

// One benchmark's embedding-layer geometry. The reduction plan depends on
// the preset: multi-hot presets gather max_reduction lookups per table and
// reduce them within the table; NCF gathers one lookup per table and
// reduces across table pairs.
struct BenchmarkConfig {
    std::string name = "custom";
    std::uint32_t num_tables = 2;
    std::uint32_t max_reduction = 2;  // N
    std::uint32_t embedding_dim = 512;  // fp32 elements -> 2048 bytes
    std::uint64_t rows_per_table = 16384;
    std::uint32_t batch_size = 64;
    IndexDistribution index_distribution = IndexDistribution::Uniform;
    double zipf_s = 0.99;
    bool multi_hot = true;              // N lookups per table
    Opcode reduce_op = Opcode::Reduce;  // Reduce or Average
    std::uint32_t fc_layers = 0;        // recorded, unused (t_dnn is external)

    std::uint32_t embedding_bytes() const { return embedding_dim * 4; }
};

// Named presets: NCF, YouTube, Fox, Facebook.
BenchmarkConfig benchmark_preset(const std::string& name);
std::vector<std::string> benchmark_preset_names();

// Throws ConfigError on inconsistent geometry.
void validate(const BenchmarkConfig& cfg);

struct InstructionStream {
    std::vector<TensorInstruction> instrs;
    std::uint64_t table_rows = 0;
    std::uint64_t gathered_bytes_per_inference = 0;  // sum over tables of B*L*E
    std::uint64_t reduced_bytes_per_inference = 0;   // bytes after reduction
    std::uint32_t inferences = 0;
};

// Lays out the tables, index buffers and destination buffers in the pool,
// fills tables and indices deterministically from the seed, and emits the
// per-inference instruction sequence (one GATHER per table followed by the
// preset's REDUCE/AVERAGE plan).
InstructionStream build_stream(const BenchmarkConfig& cfg,
                               const PoolGeometry& geom, MemoryPoolImage& pool,
                               std::uint64_t seed,
                               std::uint32_t inferences = 1,
                               bool fill_tables = true);

// Closed-form model footprint: rows x dim x 4 bytes x num_tables.
std::uint64_t footprint_bytes(std::uint64_t rows, std::uint64_t embedding_dim,
                              std::uint64_t num_tables);

// Dense reference oracle: an independent reimplementation of the tensor
// semantics over a flat byte image, used as the bit-exact target for all
// functional tests. Deliberately shares no code with the isa execution path.
class ReferencePool {
public:
    explicit ReferencePool(std::uint64_t capacity_bytes)
        : bytes_(capacity_bytes, 0) {}

    void store(std::uint64_t addr, const std::uint8_t* src, std::uint64_t len);
    void apply(const TensorInstruction& instr);

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

}  // namespace nmpsim
