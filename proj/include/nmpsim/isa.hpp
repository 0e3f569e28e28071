#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nmpsim/pool.hpp"

namespace nmpsim {

enum class Opcode : std::uint8_t {
    Gather = 0x01,
    Reduce = 0x02,
    Average = 0x03,
};

const char* to_string(Opcode op);

enum class ElemType : std::uint8_t {
    F32 = 0,
};

// One tensor instruction, broadcast to every NMP core in the node.
//
// GATHER   copies batch_size embedding rows, selected by a u32 index buffer
//          at index_base, from the table at src_base to dst_base.
// REDUCE   element-wise sums num_inputs tensors of batch_size*embedding_bytes
//          each, laid out contiguously from src_base, into dst_base.
// AVERAGE  as REDUCE, then scales once by 1/num_inputs.
struct TensorInstruction {
    Opcode opcode = Opcode::Gather;
    std::uint64_t dst_base = 0;    // pool-physical byte address
    std::uint64_t src_base = 0;    // pool-physical byte address
    std::uint64_t index_base = 0;  // GATHER only
    std::uint32_t batch_size = 1;  // embeddings per tensor, B >= 1
    std::uint32_t embedding_bytes = 64;  // multiple of 64
    std::uint32_t num_inputs = 1;  // N; fixed 1 for GATHER, >= 2 otherwise
    ElemType elem_type = ElemType::F32;

    std::uint64_t tensor_bytes() const {
        return std::uint64_t{batch_size} * embedding_bytes;
    }
    std::uint64_t src_bytes() const { return tensor_bytes() * num_inputs; }
    std::uint64_t dst_bytes() const { return tensor_bytes(); }

    bool operator==(const TensorInstruction&) const = default;
};

// Fixed-width wire format. Word 0 layout:
//   [127:120] opcode
//   [119:72]  dst_base (48 b)
//   [71:24]   src_base (48 b)
//   [23:16]   num_inputs
//   [15:8]    log2(embedding_bytes / 64)
//   [7:0]     log2 batch field
// GATHER carries a second word: [127:80] index_base, [79:64] reserved,
// [63:48] exact batch_size. Single-word opcodes round-trip batch_size
// through the log2 field, so their batch must be a power of two.
struct Word128 {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;
    bool operator==(const Word128&) const = default;
};

struct EncodedInstruction {
    Word128 word0;
    std::optional<Word128> word1;  // present for GATHER
    bool operator==(const EncodedInstruction&) const = default;
};

// Validates the field-level invariants (alignment, widths, N range).
// Throws FieldOverflowError / MisalignedSizeError.
void validate_fields(const TensorInstruction& instr);

EncodedInstruction encode(const TensorInstruction& instr);
TensorInstruction decode(const EncodedInstruction& enc);

// Debug hex dump: one 32-hex-digit word per line, GATHER emits two lines.
std::string to_hex(const EncodedInstruction& enc);
EncodedInstruction parse_hex(const std::string& text);

// Functional (data-level) semantics, executed against the flat pool image.
// All three validate address ranges against pool capacity and reject
// dst/src overlap. If table_rows is given, exec_gather additionally checks
// every index against it.
void exec_gather(MemoryPoolImage& pool, const TensorInstruction& instr,
                 std::optional<std::uint64_t> table_rows = std::nullopt);
void exec_reduce(MemoryPoolImage& pool, const TensorInstruction& instr);
void exec_average(MemoryPoolImage& pool, const TensorInstruction& instr);

// Dispatch on opcode.
void execute(MemoryPoolImage& pool, const TensorInstruction& instr);

}  // namespace nmpsim
