#include "nmpsim/isa.hpp"

#include <bit>
#include <cstdio>
#include <sstream>

#include "nmpsim/errors.hpp"

namespace nmpsim {

namespace {

constexpr std::uint64_t kAddrMask = (std::uint64_t{1} << 48) - 1;
constexpr std::uint32_t kMaxBatch = 0xFFFF;

unsigned __int128 to_u128(const Word128& w) {
    return (static_cast<unsigned __int128>(w.hi) << 64) | w.lo;
}

Word128 from_u128(unsigned __int128 v) {
    return {static_cast<std::uint64_t>(v >> 64),
            static_cast<std::uint64_t>(v)};
}

std::uint64_t bits(unsigned __int128 v, unsigned lo, unsigned width) {
    return static_cast<std::uint64_t>(v >> lo) &
           ((width == 64) ? ~std::uint64_t{0}
                          : ((std::uint64_t{1} << width) - 1));
}

void put_bits(unsigned __int128& v, unsigned lo, std::uint64_t field) {
    v |= static_cast<unsigned __int128>(field) << lo;
}

std::uint32_t log2_ceil(std::uint32_t v) {
    return v <= 1 ? 0 : 32 - std::countl_zero(v - 1);
}

// Ranges of one instruction, for overlap and capacity checks.
struct Ranges {
    std::uint64_t dst_begin, dst_len;
    std::uint64_t src_begin, src_len;
    std::uint64_t idx_begin, idx_len;  // len 0 when unused
};

Ranges ranges_of(const TensorInstruction& i) {
    Ranges r{};
    r.dst_begin = i.dst_base;
    r.dst_len = i.dst_bytes();
    r.src_begin = i.src_base;
    r.src_len = i.opcode == Opcode::Gather ? 0 : i.src_bytes();
    r.idx_begin = i.index_base;
    r.idx_len = i.opcode == Opcode::Gather ? std::uint64_t{i.batch_size} * 4 : 0;
    return r;
}

bool overlaps(std::uint64_t a, std::uint64_t alen, std::uint64_t b,
              std::uint64_t blen) {
    return alen != 0 && blen != 0 && a < b + blen && b < a + alen;
}

void check_no_overlap(const TensorInstruction& i) {
    const Ranges r = ranges_of(i);
    if (overlaps(r.dst_begin, r.dst_len, r.src_begin, r.src_len) ||
        overlaps(r.dst_begin, r.dst_len, r.idx_begin, r.idx_len)) {
        throw AddressFaultError(std::string(to_string(i.opcode)) +
                                ": destination overlaps a source range");
    }
}

}  // namespace

const char* to_string(Opcode op) {
    switch (op) {
        case Opcode::Gather: return "GATHER";
        case Opcode::Reduce: return "REDUCE";
        case Opcode::Average: return "AVERAGE";
    }
    return "?";
}

void validate_fields(const TensorInstruction& instr) {
    if (instr.embedding_bytes == 0 || instr.embedding_bytes % kBlockBytes != 0) {
        throw MisalignedSizeError("embedding_bytes " +
                                  std::to_string(instr.embedding_bytes) +
                                  " is not a positive multiple of 64");
    }
    if (!std::has_single_bit(instr.embedding_bytes / kBlockBytes)) {
        throw FieldOverflowError(
            "embedding_bytes / 64 must be a power of two for encoding, got " +
            std::to_string(instr.embedding_bytes));
    }
    if (instr.batch_size == 0 || instr.batch_size > kMaxBatch) {
        throw FieldOverflowError("batch_size " +
                                 std::to_string(instr.batch_size) +
                                 " outside [1, 65535]");
    }
    if ((instr.dst_base & ~kAddrMask) || (instr.src_base & ~kAddrMask) ||
        (instr.index_base & ~kAddrMask)) {
        throw FieldOverflowError("base address exceeds 48 bits");
    }
    if (instr.opcode == Opcode::Gather) {
        if (instr.num_inputs != 1) {
            throw FieldOverflowError("GATHER requires num_inputs == 1");
        }
    } else {
        if (instr.num_inputs < 2 || instr.num_inputs > 255) {
            throw FieldOverflowError(std::string(to_string(instr.opcode)) +
                                     " requires num_inputs in [2, 255], got " +
                                     std::to_string(instr.num_inputs));
        }
        // Single-word opcodes carry only the log2 batch field.
        if (!std::has_single_bit(instr.batch_size)) {
            throw FieldOverflowError(
                std::string(to_string(instr.opcode)) +
                " batch_size must be a power of two to round-trip the "
                "encoding, got " + std::to_string(instr.batch_size));
        }
    }
    if (instr.elem_type != ElemType::F32) {
        throw FieldOverflowError("only fp32 elements are supported");
    }
}

EncodedInstruction encode(const TensorInstruction& instr) {
    validate_fields(instr);
    unsigned __int128 w0 = 0;
    put_bits(w0, 120, static_cast<std::uint64_t>(instr.opcode));
    put_bits(w0, 72, instr.dst_base & kAddrMask);
    put_bits(w0, 24, instr.src_base & kAddrMask);
    put_bits(w0, 16, instr.num_inputs);
    put_bits(w0, 8, log2_ceil(instr.embedding_bytes / kBlockBytes));
    put_bits(w0, 0, log2_ceil(instr.batch_size));

    EncodedInstruction enc{from_u128(w0), std::nullopt};
    if (instr.opcode == Opcode::Gather) {
        unsigned __int128 w1 = 0;
        put_bits(w1, 80, instr.index_base & kAddrMask);
        put_bits(w1, 48, instr.batch_size);
        enc.word1 = from_u128(w1);
    }
    return enc;
}

TensorInstruction decode(const EncodedInstruction& enc) {
    const unsigned __int128 w0 = to_u128(enc.word0);
    const std::uint64_t opc = bits(w0, 120, 8);
    if (opc != static_cast<std::uint64_t>(Opcode::Gather) &&
        opc != static_cast<std::uint64_t>(Opcode::Reduce) &&
        opc != static_cast<std::uint64_t>(Opcode::Average)) {
        throw FieldOverflowError("unknown opcode " + std::to_string(opc));
    }
    TensorInstruction instr;
    instr.opcode = static_cast<Opcode>(opc);
    instr.dst_base = bits(w0, 72, 48);
    instr.src_base = bits(w0, 24, 48);
    instr.num_inputs = static_cast<std::uint32_t>(bits(w0, 16, 8));
    instr.embedding_bytes =
        static_cast<std::uint32_t>(kBlockBytes << bits(w0, 8, 8));
    if (instr.opcode == Opcode::Gather) {
        if (!enc.word1) {
            throw FieldOverflowError("GATHER encoding is missing its second word");
        }
        const unsigned __int128 w1 = to_u128(*enc.word1);
        instr.index_base = bits(w1, 80, 48);
        instr.batch_size = static_cast<std::uint32_t>(bits(w1, 48, 16));
    } else {
        if (enc.word1) {
            throw FieldOverflowError("unexpected second word for " +
                                     std::string(to_string(instr.opcode)));
        }
        instr.batch_size = std::uint32_t{1} << bits(w0, 0, 8);
    }
    validate_fields(instr);
    return instr;
}

std::string to_hex(const EncodedInstruction& enc) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%016llx%016llx\n",
                  static_cast<unsigned long long>(enc.word0.hi),
                  static_cast<unsigned long long>(enc.word0.lo));
    std::string out = buf;
    if (enc.word1) {
        std::snprintf(buf, sizeof buf, "%016llx%016llx\n",
                      static_cast<unsigned long long>(enc.word1->hi),
                      static_cast<unsigned long long>(enc.word1->lo));
        out += buf;
    }
    return out;
}

EncodedInstruction parse_hex(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<Word128> words;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.size() != 32) {
            throw ParseError("expected 32 hex digits, got " +
                             std::to_string(line.size()), lineno);
        }
        Word128 w;
        try {
            w.hi = std::stoull(line.substr(0, 16), nullptr, 16);
            w.lo = std::stoull(line.substr(16, 16), nullptr, 16);
        } catch (const std::exception&) {
            throw ParseError("invalid hex digits", lineno);
        }
        words.push_back(w);
    }
    if (words.empty() || words.size() > 2) {
        throw ParseError("expected one or two instruction words", lineno);
    }
    EncodedInstruction enc{words[0], std::nullopt};
    if (words.size() == 2) enc.word1 = words[1];
    return enc;
}

void exec_gather(MemoryPoolImage& pool, const TensorInstruction& instr,
                 std::optional<std::uint64_t> table_rows) {
    if (instr.opcode != Opcode::Gather) {
        throw FieldOverflowError("exec_gather requires a GATHER instruction");
    }
    check_no_overlap(instr);
    const std::uint64_t eb = instr.embedding_bytes;
    pool.check_range(instr.index_base, std::uint64_t{instr.batch_size} * 4);
    pool.check_range(instr.dst_base, instr.dst_bytes());
    for (std::uint32_t b = 0; b < instr.batch_size; ++b) {
        const std::uint32_t idx = pool.read_u32(instr.index_base + b * 4ull);
        if (table_rows && idx >= *table_rows) {
            throw IndexOutOfRangeError("index " + std::to_string(idx) +
                                       " >= table rows " +
                                       std::to_string(*table_rows));
        }
        const auto row = pool.view(instr.src_base + std::uint64_t{idx} * eb, eb);
        std::memcpy(pool.data() + instr.dst_base + b * eb, row.data(), eb);
    }
}

namespace {

void reduce_impl(MemoryPoolImage& pool, const TensorInstruction& instr,
                 bool average) {
    check_no_overlap(instr);
    const std::uint64_t tensor_bytes = instr.tensor_bytes();
    pool.check_range(instr.src_base, instr.src_bytes());
    pool.check_range(instr.dst_base, tensor_bytes);
    const std::uint64_t elems = tensor_bytes / 4;
    const float* src =
        reinterpret_cast<const float*>(pool.data() + instr.src_base);
    float* dst = reinterpret_cast<float*>(pool.data() + instr.dst_base);
    const float inv_n = 1.0f / static_cast<float>(instr.num_inputs);
    for (std::uint64_t e = 0; e < elems; ++e) {
        // Accumulate strictly in ascending input order; AVERAGE scales once
        // after the full accumulation.
        float acc = src[e];
        for (std::uint32_t i = 1; i < instr.num_inputs; ++i) {
            acc += src[i * elems + e];
        }
        dst[e] = average ? acc * inv_n : acc;
    }
}

}  // namespace

void exec_reduce(MemoryPoolImage& pool, const TensorInstruction& instr) {
    if (instr.opcode != Opcode::Reduce) {
        throw FieldOverflowError("exec_reduce requires a REDUCE instruction");
    }
    reduce_impl(pool, instr, false);
}

void exec_average(MemoryPoolImage& pool, const TensorInstruction& instr) {
    if (instr.opcode != Opcode::Average) {
        throw FieldOverflowError("exec_average requires an AVERAGE instruction");
    }
    reduce_impl(pool, instr, true);
}

void execute(MemoryPoolImage& pool, const TensorInstruction& instr) {
    switch (instr.opcode) {
        case Opcode::Gather: exec_gather(pool, instr); return;
        case Opcode::Reduce: exec_reduce(pool, instr); return;
        case Opcode::Average: exec_average(pool, instr); return;
    }
    throw FieldOverflowError("unknown opcode");
}

}  // namespace nmpsim
