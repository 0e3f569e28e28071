#include <doctest.h>

#include <random>

#include "nmpsim/isa.hpp"

using namespace nmpsim;

namespace {

TensorInstruction make_gather(std::uint32_t batch, std::uint32_t eb) {
    TensorInstruction i;
    i.opcode = Opcode::Gather;
    i.src_base = 0;
    i.index_base = 1 << 20;
    i.dst_base = 2 << 20;
    i.batch_size = batch;
    i.embedding_bytes = eb;
    i.num_inputs = 1;
    return i;
}

TensorInstruction make_reduce(Opcode op, std::uint32_t n, std::uint32_t batch,
                              std::uint32_t eb) {
    TensorInstruction i;
    i.opcode = op;
    i.src_base = 0;
    i.dst_base = 8 << 20;
    i.batch_size = batch;
    i.embedding_bytes = eb;
    i.num_inputs = n;
    return i;
}

}  // namespace

TEST_CASE("encode/decode round-trips every field-legal instruction") {
    std::mt19937_64 rng(42);
    for (int t = 0; t < 2000; ++t) {
        TensorInstruction i;
        const int pick = static_cast<int>(rng() % 3);
        i.opcode = pick == 0   ? Opcode::Gather
                   : pick == 1 ? Opcode::Reduce
                               : Opcode::Average;
        i.dst_base = (rng() & ((1ull << 48) - 1)) & ~63ull;
        i.src_base = (rng() & ((1ull << 48) - 1)) & ~63ull;
        i.embedding_bytes = 64u << (rng() % 8);
        if (i.opcode == Opcode::Gather) {
            i.index_base = rng() & ((1ull << 48) - 1);
            i.batch_size = 1 + static_cast<std::uint32_t>(rng() % 0xFFFF);
            i.num_inputs = 1;
        } else {
            i.batch_size = 1u << (rng() % 16);
            i.num_inputs = 2 + static_cast<std::uint32_t>(rng() % 254);
        }
        CAPTURE(t);
        const TensorInstruction back = decode(encode(i));
        CHECK(back == i);
    }
}

TEST_CASE("hex round-trip and word shapes") {
    const TensorInstruction g = make_gather(64, 2048);
    const EncodedInstruction enc = encode(g);
    REQUIRE(enc.word1.has_value());
    CHECK(to_hex(enc).size() == 66);  // two 32-digit lines
    CHECK(decode(parse_hex(to_hex(enc))) == g);

    // opcode lives in the top byte
    CHECK((enc.word0.hi >> 56) == 0x01);

    const TensorInstruction r = make_reduce(Opcode::Reduce, 2, 64, 2048);
    const EncodedInstruction renc = encode(r);
    CHECK(!renc.word1.has_value());
    CHECK((renc.word0.hi >> 56) == 0x02);
    CHECK(decode(parse_hex(to_hex(renc))) == r);
}

TEST_CASE("multi-hot AVERAGE config round-trips") {
    // N=50, 2048-byte embeddings, batch 64
    const TensorInstruction a = make_reduce(Opcode::Average, 50, 64, 2048);
    const TensorInstruction back = decode(encode(a));
    CHECK(back.num_inputs == 50);
    CHECK(back.embedding_bytes == 2048);
    CHECK(back.batch_size == 64);
    CHECK(back == a);
}

TEST_CASE("field validation rejects out-of-range values") {
    CHECK_THROWS_AS(encode(make_gather(0, 64)), FieldOverflowError);
    CHECK_THROWS_AS(encode(make_gather(65536, 64)), FieldOverflowError);
    CHECK_THROWS_AS(encode(make_gather(1, 96)), MisalignedSizeError);
    CHECK_THROWS_AS(encode(make_gather(1, 192)), FieldOverflowError);
    CHECK_THROWS_AS(encode(make_reduce(Opcode::Reduce, 1, 4, 64)),
                    FieldOverflowError);
    CHECK_THROWS_AS(encode(make_reduce(Opcode::Reduce, 256, 4, 64)),
                    FieldOverflowError);
    // non-power-of-two batch cannot round-trip a single-word encoding
    CHECK_THROWS_AS(encode(make_reduce(Opcode::Reduce, 2, 3, 64)),
                    FieldOverflowError);

    TensorInstruction big = make_gather(1, 64);
    big.dst_base = 1ull << 48;
    CHECK_THROWS_AS(encode(big), FieldOverflowError);
}

TEST_CASE("parse_hex rejects malformed text") {
    CHECK_THROWS_AS(parse_hex(""), ParseError);
    CHECK_THROWS_AS(parse_hex("abc\n"), ParseError);
    CHECK_THROWS_AS(parse_hex("zz000000000000000000000000000000\n"), ParseError);
    const std::string w = "01000000000000000000000000000000\n";
    CHECK_THROWS_AS(parse_hex(w + w + w), ParseError);
}

TEST_CASE("gather copies the indexed rows") {
    MemoryPoolImage pool(1 << 16);
    const std::uint32_t eb = 128;
    for (std::uint32_t row = 0; row < 8; ++row) {
        for (std::uint32_t e = 0; e < eb / 4; ++e) {
            pool.write_f32(row * eb + e * 4, static_cast<float>(row * 100 + e));
        }
    }
    TensorInstruction g = make_gather(3, eb);
    g.src_base = 0;
    g.index_base = 0x4000;
    g.dst_base = 0x8000;
    pool.write_u32(g.index_base + 0, 5);
    pool.write_u32(g.index_base + 4, 0);
    pool.write_u32(g.index_base + 8, 7);

    exec_gather(pool, g, 8);
    CHECK(pool.read_f32(g.dst_base + 0) == 500.0f);
    CHECK(pool.read_f32(g.dst_base + 4) == 501.0f);
    CHECK(pool.read_f32(g.dst_base + eb) == 0.0f);
    CHECK(pool.read_f32(g.dst_base + 2 * eb) == 700.0f);

    // out-of-table index
    pool.write_u32(g.index_base + 8, 8);
    CHECK_THROWS_AS(exec_gather(pool, g, 8), IndexOutOfRangeError);
    // without a table bound it is only checked against the pool
    exec_gather(pool, g);
}

TEST_CASE("reduce sums in ascending input order; average scales once") {
    MemoryPoolImage pool(1 << 16);
    TensorInstruction r = make_reduce(Opcode::Reduce, 4, 1, 64);
    r.src_base = 0;
    r.dst_base = 0x1000;
    for (std::uint32_t i = 0; i < 4; ++i) {
        for (std::uint32_t e = 0; e < 16; ++e) {
            pool.write_f32(i * 64 + e * 4, static_cast<float>(i + 1));
        }
    }
    exec_reduce(pool, r);
    CHECK(pool.read_f32(r.dst_base) == 10.0f);

    r.opcode = Opcode::Average;
    exec_average(pool, r);
    CHECK(pool.read_f32(r.dst_base) == 2.5f);

    // a single scale by 1/N, not N-1 partial divisions: use values whose
    // running average would differ
    pool.write_f32(0, 1.0f);
    pool.write_f32(64, 2.0f);
    pool.write_f32(128, 3.0f);
    pool.write_f32(192, 6.0f);
    exec_average(pool, r);
    CHECK(pool.read_f32(r.dst_base) == 3.0f);
}

TEST_CASE("destination overlap is a fault") {
    MemoryPoolImage pool(1 << 16);
    TensorInstruction r = make_reduce(Opcode::Reduce, 2, 1, 64);
    r.src_base = 0;
    r.dst_base = 64;  // inside the 128-byte source range
    CHECK_THROWS_AS(exec_reduce(pool, r), AddressFaultError);

    TensorInstruction g = make_gather(4, 64);
    g.src_base = 0;
    g.index_base = 0x100;
    g.dst_base = 0x100;  // overlaps the index buffer
    CHECK_THROWS_AS(exec_gather(pool, g), AddressFaultError);
}

TEST_CASE("execute validates pool bounds") {
    MemoryPoolImage pool(4096);
    TensorInstruction r = make_reduce(Opcode::Reduce, 2, 1, 64);
    r.src_base = 0;
    r.dst_base = 4096 - 32;  // destination runs past the end
    CHECK_THROWS_AS(execute(pool, r), AddressFaultError);
}
