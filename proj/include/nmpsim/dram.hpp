#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nmpsim/errors.hpp"

namespace nmpsim {

// DDR4 command-level timing constants. All *_cycles values are in memory
// clock cycles (tCK); tBL is the burst length in beats (8 beats = tBL/2
// clocks of data bus occupancy for a 64-byte access).
// Defaults follow the DDR4-3200AA speed bin on a PC4-25600 x64 rank.
struct DramTimingParams {
    std::uint32_t data_rate_mts = 3200;  // mega-transfers/s -> 25.6 GB/s peak
    std::uint32_t tCK_ps = 625;          // 1600 MHz memory clock
    std::uint32_t CL = 22;
    std::uint32_t tRCD = 22;
    std::uint32_t tRP = 22;
    std::uint32_t tRAS = 52;
    std::uint32_t tRC = 74;  // == tRAS + tRP
    std::uint32_t tBL = 8;   // beats per burst
    std::uint32_t tCCD_L = 8;
    std::uint32_t tCCD_S = 4;
    std::uint32_t tRRD_S = 4;
    std::uint32_t tRRD_L = 6;
    std::uint32_t tFAW = 26;
    std::uint32_t tWR = 24;
    std::uint32_t tRTP = 12;
    std::uint32_t rw_turnaround = 8;  // bus direction change penalty
    std::uint32_t num_banks = 16;     // in 4 bank groups
    std::uint32_t bank_groups = 4;
    std::uint32_t row_bytes = 8192;
    bool refresh_enabled = false;
    std::uint32_t tREFI = 12480;  // 7.8 us
    std::uint32_t tRFC = 256;     // 160 ns

    double peak_bandwidth_gbs() const { return data_rate_mts * 8.0 / 1000.0; }
    std::uint32_t burst_cycles() const { return tBL / 2; }
};

// Throws ConfigError on inconsistent parameters (tRC != tRAS + tRP, etc).
void validate(const DramTimingParams& p);

enum class RequestKind : std::uint8_t { Read, Write };

// One 64-byte block access in rank-local address space.
struct BlockRequest {
    RequestKind kind = RequestKind::Read;
    std::uint64_t rank_local_addr = 0;  // 64-byte aligned
    std::uint64_t issue_order = 0;
    bool operator==(const BlockRequest&) const = default;
};

struct RankSimResult {
    std::uint64_t total_cycles = 0;
    std::uint64_t busy_data_cycles = 0;
    std::uint64_t bytes_moved = 0;
    double achieved_bandwidth_gbs = 0.0;
    double row_hit_rate = 0.0;

    double total_ns(const DramTimingParams& p) const {
        return static_cast<double>(total_cycles) * p.tCK_ps / 1000.0;
    }
};

// Simulates one rank servicing the requests with per-bank FCFS, open-page
// scheduling. Banks arbitrate for the shared data bus; a bank's requests
// stay in order but different banks may interleave their column accesses.
RankSimResult simulate_rank(const DramTimingParams& params,
                            std::span<const BlockRequest> reqs);

// Several DIMMs time-multiplexing one physical channel: every DIMM keeps
// its own banks and tFAW/tRRD windows, but all bursts share one data bus,
// so aggregate bandwidth never exceeds the single-channel peak.
RankSimResult simulate_shared_channel(
    const DramTimingParams& params, std::uint32_t dimms_per_channel,
    const std::vector<std::vector<BlockRequest>>& reqs_per_dimm);

// Trace text format, one request per line in issue order: "0x<hex-addr> <R|W>".
std::string export_trace(std::span<const BlockRequest> reqs);
std::vector<BlockRequest> import_trace(const std::string& text);

}  // namespace nmpsim
