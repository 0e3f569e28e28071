#include "nmpsim/dram.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <deque>
#include <limits>
#include <sstream>

#include "nmpsim/pool.hpp"

namespace nmpsim {

void validate(const DramTimingParams& p) {
    if (p.tRC != p.tRAS + p.tRP) {
        throw ConfigError("tRC must equal tRAS + tRP");
    }
    if (p.tBL == 0 || p.tBL % 2 != 0) {
        throw ConfigError("tBL must be a positive even beat count");
    }
    if (p.num_banks == 0 || p.bank_groups == 0 ||
        p.num_banks % p.bank_groups != 0) {
        throw ConfigError("num_banks must be a positive multiple of bank_groups");
    }
    if (p.row_bytes == 0 || p.row_bytes % kBlockBytes != 0) {
        throw ConfigError("row_bytes must be a positive multiple of 64");
    }
    if (static_cast<std::uint64_t>(p.tCK_ps) * p.data_rate_mts != 2'000'000) {
        throw ConfigError("tCK_ps and data_rate_mts are inconsistent");
    }
    if (p.refresh_enabled && p.tRFC >= p.tREFI) {
        throw ConfigError("tRFC must be smaller than tREFI");
    }
}

namespace {

constexpr std::int64_t kNegInf = std::numeric_limits<std::int64_t>::min() / 4;

// One column access after address decomposition.
struct SchedReq {
    bool write = false;
    std::uint32_t bank = 0;   // global bank index (dimm * num_banks + bank)
    std::uint32_t rank = 0;   // dimm index; tCCD/tRRD/tFAW windows are per rank
    std::uint32_t group = 0;  // bank group within the rank
    std::uint64_t row = 0;
    std::uint64_t order = 0;
};

struct BankState {
    std::int64_t open_row = -1;
    std::int64_t cas_allowed = 0;  // ACT + tRCD of the open row
    std::int64_t pre_allowed = 0;  // max(ACT+tRAS, read+tRTP, write recovery)
    std::int64_t act_allowed = 0;  // after the last precharge completes
};

struct RankState {
    std::vector<std::int64_t> last_cas_per_group;
    std::deque<std::int64_t> act_window;  // up to 4 most recent ACTs
    std::int64_t last_act = kNegInf;
    std::uint32_t last_act_group = 0;
};

// Refresh blocks the rank for tRFC at the start of every tREFI period
// (after the first).
std::int64_t skip_refresh(const DramTimingParams& p, std::int64_t t,
                          std::int64_t span) {
    if (!p.refresh_enabled) return t;
    for (;;) {
        // window k occupies [k*tREFI, k*tREFI + tRFC) for k >= 1
        const std::int64_t k = (t + span - 1) / p.tREFI;
        if (k >= 1 && t < k * p.tREFI + p.tRFC && t + span > k * p.tREFI) {
            t = k * p.tREFI + p.tRFC;
            continue;
        }
        const std::int64_t k0 = t / p.tREFI;
        if (k0 >= 1 && k0 != k && t < k0 * p.tREFI + p.tRFC) {
            t = k0 * p.tREFI + p.tRFC;
            continue;
        }
        return t;
    }
}

RankSimResult run_scheduler(const DramTimingParams& p,
                            std::vector<std::vector<SchedReq>> bank_queues,
                            std::uint32_t num_ranks) {
    const std::int64_t burst = p.burst_cycles();
    const std::uint32_t nbanks = static_cast<std::uint32_t>(bank_queues.size());

    std::vector<BankState> banks(nbanks);
    std::vector<RankState> ranks(num_ranks);
    for (auto& r : ranks) r.last_cas_per_group.assign(p.bank_groups, kNegInf);

    std::vector<std::size_t> head(nbanks, 0);
    std::uint64_t remaining = 0, total_reqs = 0;
    for (const auto& q : bank_queues) remaining += q.size();
    total_reqs = remaining;

    std::int64_t bus_free = 0;
    int last_dir = -1;  // -1 none, 0 read, 1 write
    std::int64_t last_data_end = 0;
    std::uint64_t hits = 0;

    while (remaining > 0) {
        // Pick, among per-bank FCFS heads, the access whose data can start
        // earliest (oldest issue order breaks ties).
        std::int64_t best_start = 0;
        std::uint32_t best_bank = 0;
        bool found = false;
        for (std::uint32_t b = 0; b < nbanks; ++b) {
            if (head[b] >= bank_queues[b].size()) continue;
            const SchedReq& rq = bank_queues[b][head[b]];
            const BankState& bank = banks[b];
            RankState& rk = ranks[rq.rank];

            std::int64_t ccd = 0;
            for (std::uint32_t g = 0; g < p.bank_groups; ++g) {
                const std::int64_t last = rk.last_cas_per_group[g];
                if (last == kNegInf) continue;
                ccd = std::max(ccd, last + (g == rq.group ? p.tCCD_L : p.tCCD_S));
            }

            const bool hit =
                bank.open_row == static_cast<std::int64_t>(rq.row);
            std::int64_t cas_min;
            if (hit) {
                cas_min = std::max(ccd, bank.cas_allowed);
            } else {
                std::int64_t act_ready;
                if (bank.open_row >= 0) {
                    act_ready = std::max<std::int64_t>(bank.pre_allowed, 0) + p.tRP;
                } else {
                    act_ready = bank.act_allowed;
                }
                act_ready = std::max(act_ready,
                                     rk.last_act + (rk.last_act_group == rq.group
                                                        ? p.tRRD_L
                                                        : p.tRRD_S));
                if (rk.act_window.size() >= 4) {
                    act_ready = std::max(act_ready,
                                         rk.act_window.front() + p.tFAW);
                }
                act_ready = skip_refresh(p, act_ready, 1);
                cas_min = std::max(act_ready + p.tRCD, ccd);
            }
            std::int64_t bus_min = bus_free;
            if (last_dir >= 0 && last_dir != (rq.write ? 1 : 0)) {
                bus_min += p.rw_turnaround;
            }
            std::int64_t start = std::max(cas_min + p.CL, bus_min);
            start = skip_refresh(p, start, burst);

            if (!found || start < best_start ||
                (start == best_start &&
                 rq.order < bank_queues[best_bank][head[best_bank]].order)) {
                found = true;
                best_start = start;
                best_bank = b;
            }
        }

        const SchedReq& rq = bank_queues[best_bank][head[best_bank]];
        BankState& bank = banks[best_bank];
        RankState& rk = ranks[rq.rank];

        const std::int64_t data_start = best_start;
        const std::int64_t cas = data_start - p.CL;
        const bool hit = bank.open_row == static_cast<std::int64_t>(rq.row);
        if (hit) {
            hits++;
        } else {
            const std::int64_t act = cas - p.tRCD;
            bank.open_row = static_cast<std::int64_t>(rq.row);
            bank.cas_allowed = act + p.tRCD;
            bank.pre_allowed = act + p.tRAS;
            rk.last_act = act;
            rk.last_act_group = rq.group;
            rk.act_window.push_back(act);
            if (rk.act_window.size() > 4) rk.act_window.pop_front();
        }
        if (rq.write) {
            bank.pre_allowed =
                std::max(bank.pre_allowed, data_start + burst + p.tWR);
        } else {
            bank.pre_allowed = std::max(bank.pre_allowed, cas + p.tRTP);
        }
        rk.last_cas_per_group[rq.group] =
            std::max(rk.last_cas_per_group[rq.group], cas);
        bus_free = data_start + burst;
        last_dir = rq.write ? 1 : 0;
        last_data_end = std::max(last_data_end, data_start + burst);

        head[best_bank]++;
        remaining--;
    }

    RankSimResult res;
    res.total_cycles = static_cast<std::uint64_t>(last_data_end);
    res.busy_data_cycles = total_reqs * static_cast<std::uint64_t>(burst);
    res.bytes_moved = total_reqs * kBlockBytes;
    if (total_reqs > 0) {
        const double ns = static_cast<double>(res.total_cycles) * p.tCK_ps / 1000.0;
        res.achieved_bandwidth_gbs = static_cast<double>(res.bytes_moved) / ns;
        res.row_hit_rate = static_cast<double>(hits) / total_reqs;
    }
    return res;
}

// Rank-local address decomposition: a 4 KB run of consecutive blocks stays
// within one bank row, the next run moves to the next bank (rotating bank
// groups), and a row's columns are revisited after a full sweep of the
// banks. Streaming therefore sees row hits and bank-group interleaved
// column commands.
SchedReq decompose(const DramTimingParams& p, const BlockRequest& req,
                   std::uint32_t dimm) {
    if (req.rank_local_addr % kBlockBytes != 0) {
        throw AddressFaultError("request address " +
                                std::to_string(req.rank_local_addr) +
                                " is not 64-byte aligned");
    }
    const std::uint64_t cols_per_row = p.row_bytes / kBlockBytes;
    const std::uint64_t low_cols = std::min<std::uint64_t>(64, cols_per_row);
    const std::uint64_t block = req.rank_local_addr / kBlockBytes;
    const std::uint64_t bank_lin = (block / low_cols) % p.num_banks;
    const std::uint64_t seg = block / (low_cols * p.num_banks);

    SchedReq rq;
    rq.write = req.kind == RequestKind::Write;
    rq.bank = dimm * p.num_banks + static_cast<std::uint32_t>(bank_lin);
    rq.rank = dimm;
    rq.group = static_cast<std::uint32_t>(bank_lin % p.bank_groups);
    rq.row = seg / (cols_per_row / low_cols);
    rq.order = req.issue_order;
    return rq;
}

}  // namespace

RankSimResult simulate_rank(const DramTimingParams& params,
                            std::span<const BlockRequest> reqs) {
    validate(params);
    std::vector<std::vector<SchedReq>> queues(params.num_banks);
    for (const BlockRequest& r : reqs) {
        SchedReq rq = decompose(params, r, 0);
        queues[rq.bank].push_back(rq);
    }
    return run_scheduler(params, std::move(queues), 1);
}

RankSimResult simulate_shared_channel(
    const DramTimingParams& params, std::uint32_t dimms_per_channel,
    const std::vector<std::vector<BlockRequest>>& reqs_per_dimm) {
    validate(params);
    if (dimms_per_channel < 1) {
        throw ConfigError("dimms_per_channel must be >= 1");
    }
    if (reqs_per_dimm.size() > dimms_per_channel) {
        throw ConfigError("more request streams than DIMMs on the channel");
    }
    std::vector<std::vector<SchedReq>> queues(
        std::size_t{params.num_banks} * dimms_per_channel);
    for (std::uint32_t d = 0; d < reqs_per_dimm.size(); ++d) {
        for (const BlockRequest& r : reqs_per_dimm[d]) {
            SchedReq rq = decompose(params, r, d);
            queues[rq.bank].push_back(rq);
        }
    }
    return run_scheduler(params, std::move(queues), dimms_per_channel);
}

std::string export_trace(std::span<const BlockRequest> reqs) {
    std::string out;
    char buf[40];
    for (const BlockRequest& r : reqs) {
        std::snprintf(buf, sizeof buf, "0x%" PRIx64 " %c\n", r.rank_local_addr,
                      r.kind == RequestKind::Write ? 'W' : 'R');
        out += buf;
    }
    return out;
}

std::vector<BlockRequest> import_trace(const std::string& text) {
    std::vector<BlockRequest> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::uint64_t addr = 0;
        char kind = 0;
        if (std::sscanf(line.c_str(), "0x%" SCNx64 " %c", &addr, &kind) != 2 ||
            (kind != 'R' && kind != 'W')) {
            throw ParseError("malformed trace line '" + line + "'", lineno);
        }
        out.push_back({kind == 'W' ? RequestKind::Write : RequestKind::Read,
                       addr, out.size()});
    }
    return out;
}

}  // namespace nmpsim
