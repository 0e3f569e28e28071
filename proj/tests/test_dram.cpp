#include <doctest.h>

#include "nmpsim/dram.hpp"
#include "nmpsim/pool.hpp"

using namespace nmpsim;

namespace {

std::vector<BlockRequest> stream_reads(std::uint64_t count,
                                       std::uint64_t start = 0) {
    std::vector<BlockRequest> reqs;
    for (std::uint64_t i = 0; i < count; ++i) {
        reqs.push_back({RequestKind::Read, start + i * kBlockBytes, i});
    }
    return reqs;
}

}  // namespace

TEST_CASE("timing parameter validation") {
    DramTimingParams p;
    CHECK_NOTHROW(validate(p));
    p.tRC = 73;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.tCK_ps = 624;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.num_banks = 15;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    CHECK(p.peak_bandwidth_gbs() == doctest::Approx(25.6));
}

TEST_CASE("single read to a closed row: tRCD + CL + burst") {
    const DramTimingParams p;
    const auto res = simulate_rank(p, stream_reads(1));
    CHECK(res.total_cycles == p.tRCD + p.CL + p.burst_cycles());  // 48
    CHECK(res.bytes_moved == 64);
    CHECK(res.row_hit_rate == 0.0);
}

TEST_CASE("sequential streaming approaches peak bandwidth") {
    const DramTimingParams p;
    const auto res = simulate_rank(p, stream_reads(16384));
    CHECK(res.achieved_bandwidth_gbs >= 0.93 * p.peak_bandwidth_gbs());
    CHECK(res.row_hit_rate > 0.95);
}

TEST_CASE("row-conflict worst case is tRC-limited") {
    const DramTimingParams p;
    // Ping-pong between two rows of the same bank: with the default mapping
    // a bank's row advances every num_banks * row_bytes block run.
    const std::uint64_t row_stride =
        std::uint64_t{p.num_banks} * p.row_bytes;  // same bank, next row
    std::vector<BlockRequest> reqs;
    for (std::uint64_t i = 0; i < 64; ++i) {
        reqs.push_back({RequestKind::Read, (i % 2) * row_stride, i});
    }
    const auto res = simulate_rank(p, reqs);
    CHECK(res.row_hit_rate == 0.0);
    // 64 bytes per tRC at best
    const double cap = 64.0 / (static_cast<double>(p.tRC) * p.tCK_ps / 1000.0);
    CHECK(res.achieved_bandwidth_gbs <= cap * 1.01);
}

TEST_CASE("results are deterministic") {
    const DramTimingParams p;
    std::vector<BlockRequest> reqs = stream_reads(500);
    for (std::size_t i = 0; i < reqs.size(); i += 3) {
        reqs[i].kind = RequestKind::Write;
    }
    const auto a = simulate_rank(p, reqs);
    const auto b = simulate_rank(p, reqs);
    CHECK(a.total_cycles == b.total_cycles);
    CHECK(a.row_hit_rate == b.row_hit_rate);
}

TEST_CASE("more work never takes fewer cycles") {
    const DramTimingParams p;
    std::uint64_t prev = 0;
    for (std::uint64_t n : {16, 64, 256, 1024}) {
        const auto res = simulate_rank(p, stream_reads(n));
        CHECK(res.total_cycles >= prev);
        prev = res.total_cycles;
    }
}

TEST_CASE("refresh costs under 3 percent") {
    DramTimingParams p;
    const auto base = simulate_rank(p, stream_reads(65536));
    p.refresh_enabled = true;
    validate(p);
    const auto refr = simulate_rank(p, stream_reads(65536));
    CHECK(refr.total_cycles >= base.total_cycles);
    const double loss =
        static_cast<double>(refr.total_cycles - base.total_cycles) /
        static_cast<double>(base.total_cycles);
    CHECK(loss < 0.03);
}

TEST_CASE("shared channel caps aggregate at single-channel peak") {
    const DramTimingParams p;
    const std::uint64_t per_dimm = 8192;

    std::vector<std::vector<BlockRequest>> one{stream_reads(4 * per_dimm)};
    const auto single = simulate_shared_channel(p, 1, one);

    std::vector<std::vector<BlockRequest>> four;
    for (int d = 0; d < 4; ++d) four.push_back(stream_reads(per_dimm));
    const auto quad = simulate_shared_channel(p, 4, four);

    CHECK(single.achieved_bandwidth_gbs <= p.peak_bandwidth_gbs());
    CHECK(quad.achieved_bandwidth_gbs <= p.peak_bandwidth_gbs());
    // same total data: populating more DIMMs does not increase bandwidth
    CHECK(quad.achieved_bandwidth_gbs ==
          doctest::Approx(single.achieved_bandwidth_gbs).epsilon(0.01));

    CHECK_THROWS_AS(simulate_shared_channel(p, 1, four), ConfigError);
}

TEST_CASE("trace export/import round-trip") {
    std::vector<BlockRequest> reqs = stream_reads(5, 1 << 16);
    reqs[2].kind = RequestKind::Write;
    const std::string text = export_trace(reqs);
    const auto back = import_trace(text);
    REQUIRE(back.size() == reqs.size());
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        CHECK(back[i].kind == reqs[i].kind);
        CHECK(back[i].rank_local_addr == reqs[i].rank_local_addr);
        CHECK(back[i].issue_order == i);
    }
    // identical timing either way
    const DramTimingParams p;
    CHECK(simulate_rank(p, reqs).total_cycles ==
          simulate_rank(p, back).total_cycles);

    CHECK_THROWS_AS(import_trace("0x40 X\n"), ParseError);
    CHECK_THROWS_AS(import_trace("garbage\n"), ParseError);
    try {
        import_trace("0x0 R\nnope\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("misaligned request addresses fault") {
    const DramTimingParams p;
    std::vector<BlockRequest> reqs{{RequestKind::Read, 32, 0}};
    CHECK_THROWS_AS(simulate_rank(p, reqs), AddressFaultError);
}
