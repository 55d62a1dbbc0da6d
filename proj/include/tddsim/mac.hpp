#ifndef TDDSIM_MAC_HPP
#define TDDSIM_MAC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tddsim/common.hpp"
#include "tddsim/frame.hpp"
#include "tddsim/phy.hpp"
#include "tddsim/scenario.hpp"
#include "tddsim/traffic.hpp"

namespace tddsim {

constexpr double kTimeEps = 1e-9;

/// Per-UE link adaptation and fairness state.
struct UeLinkState {
    double sinr_est_db = 0.0;
    double olla_db = 0.0;
    double avg_bits = 1.0; ///< PF average, bits per TTI
};

struct MacConfig {
    int prb_count = 24;
    int re_per_prb = 36;
    double pf_window_tti = 100.0;
    double pf_floor_bits = 1.0;
    double olla_step_db = 0.05;
    double bler_target = 0.1;
    int harq_max_attempts = 4;
    ProcessingDelays processing;
    double symbol_ms = 0.5 / kSymbolsPerSlot;

    static MacConfig from(const Scenario& s)
    {
        MacConfig c;
        c.prb_count = s.prb_count;
        c.re_per_prb = s.data_re_per_prb;
        c.pf_window_tti = s.pf_window_tti;
        c.olla_step_db = s.olla_step_db;
        c.bler_target = s.bler_target;
        c.harq_max_attempts = s.harq_max_attempts;
        c.processing = s.processing();
        c.symbol_ms = s.numerology().symbol_ms();
        return c;
    }

    double prep_ms() const { return processing.prep_symbols * symbol_ms; }
    double decode_ms(Direction d) const { return processing.decode_symbols(d) * symbol_ms; }
    double tti_ms() const { return kTtiSymbols * symbol_ms; }
};

struct Allocation {
    Packet* packet = nullptr;
    int first_prb = 0;
    int prb_count = 0;
    int mcs = 0;
    int bits = 0;
    bool retransmission = false;

    int end_prb() const { return first_prb + prb_count; }
};

inline int select_mcs(const UeLinkState& ue, const McsTable& table)
{
    return table.select(ue.sinr_est_db + ue.olla_db);
}

/// One TTI of one cell in one direction. HARQ retransmissions go first in
/// arrival order, then new transmissions by descending PF metric. Each
/// packet gets at most one contiguous allocation sized to its remaining bits.
inline std::vector<Allocation> schedule_tti(std::vector<Packet>& queue, double tti_start_ms, const MacConfig& cfg,
                                            std::vector<UeLinkState>& ues, const McsTable& table)
{
    std::vector<Allocation> out;
    std::vector<Packet*> retx;
    std::vector<Packet*> fresh;
    for (auto& p : queue) {
        if (p.finished() || p.in_flight || p.eligible_ms > tti_start_ms + kTimeEps) continue;
        (p.harq ? retx : fresh).push_back(&p);
    }
    if (retx.empty() && fresh.empty()) return out;

    int next_prb = 0;
    auto by_arrival = [](const Packet* a, const Packet* b) {
        if (a->arrival_ms != b->arrival_ms) return a->arrival_ms < b->arrival_ms;
        return a->id < b->id;
    };
    std::sort(retx.begin(), retx.end(), by_arrival);
    for (Packet* p : retx) {
        const auto& h = *p->harq;
        if (next_prb + h.prbs > cfg.prb_count) continue;
        out.push_back({p, next_prb, h.prbs, h.mcs, h.bits, true});
        next_prb += h.prbs;
    }

    struct Candidate {
        Packet* packet;
        int mcs;
        int bits_per_prb;
        double metric;
    };
    std::vector<Candidate> cands;
    cands.reserve(fresh.size());
    for (Packet* p : fresh) {
        const auto& ue = ues[p->ue];
        const int mcs = select_mcs(ue, table);
        const int bpp = std::max(1, table.bits(mcs, 1, cfg.re_per_prb));
        cands.push_back({p, mcs, bpp, bpp / std::max(ue.avg_bits, cfg.pf_floor_bits)});
    }
    std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.metric != b.metric) return a.metric > b.metric;
        return by_arrival(a.packet, b.packet);
    });
    for (const auto& c : cands) {
        const int free = cfg.prb_count - next_prb;
        if (free <= 0) break;
        const int needed = (c.packet->remaining_bits + c.bits_per_prb - 1) / c.bits_per_prb;
        int prbs = std::min(needed, free);
        // Trim so the block carries no more than the remaining bits need.
        while (prbs > 1 && table.bits(c.mcs, prbs - 1, cfg.re_per_prb) >= c.packet->remaining_bits) --prbs;
        const int bits = std::min(c.packet->remaining_bits, table.bits(c.mcs, prbs, cfg.re_per_prb));
        if (bits <= 0) continue;
        out.push_back({c.packet, next_prb, prbs, c.mcs, bits, false});
        next_prb += prbs;
    }

    for (auto& a : out) {
        a.packet->in_flight = true;
        if (!a.packet->first_tx_ms) a.packet->first_tx_ms = tti_start_ms;
        a.packet->last_tx_ms = tti_start_ms;
    }
    return out;
}

/// Exponential PF average update for every UE of one cell and direction.
inline void update_pf_averages(const std::vector<int>& served, const std::vector<Allocation>& allocs,
                               std::vector<UeLinkState>& ues, const MacConfig& cfg)
{
    const double a = 1.0 / cfg.pf_window_tti;
    for (int u : served) ues[u].avg_bits *= (1.0 - a);
    for (const auto& al : allocs) ues[al.packet->ue].avg_bits += a * al.bits;
}

enum class HarqOutcome { Completed, NextSegment, Retransmit, Dropped };

/// Applies one decode outcome to the packet that carried `alloc`.
/// Timing: the result is known after the decode delay; any follow-up
/// transmission additionally waits the preparation delay.
inline HarqOutcome harq_step(Packet& p, const Allocation& alloc, bool success, double tx_start_ms, const MacConfig& cfg,
                             UeLinkState& ue)
{
    const double tx_end = tx_start_ms + cfg.tti_ms();
    const double decoded_at = tx_end + cfg.decode_ms(p.direction);
    p.in_flight = false;

    if (!alloc.retransmission) {
        const double step_down = cfg.olla_step_db * (1.0 - cfg.bler_target) / cfg.bler_target;
        ue.olla_db += success ? cfg.olla_step_db : -step_down;
    }

    if (success) {
        p.harq.reset();
        p.harq_attempts = 0;
        p.remaining_bits -= alloc.bits;
        if (p.remaining_bits <= 0) {
            p.remaining_bits = 0;
            p.completion_ms = decoded_at;
            return HarqOutcome::Completed;
        }
        p.eligible_ms = decoded_at + cfg.prep_ms();
        return HarqOutcome::NextSegment;
    }

    p.harq_attempts = p.harq ? p.harq->attempts : 1;
    if (p.harq_attempts >= cfg.harq_max_attempts) {
        p.harq.reset();
        return HarqOutcome::Dropped;
    }
    p.eligible_ms = decoded_at + cfg.prep_ms();
    return HarqOutcome::Retransmit;
}

/// Opens or extends the HARQ process of `alloc` and returns the combined SINR.
inline double accumulate_harq(Packet& p, const Allocation& alloc, double gamma_eff)
{
    if (!alloc.retransmission || !p.harq) {
        p.harq = HarqProcess{1, gamma_eff, alloc.mcs, alloc.prb_count, alloc.bits};
    } else {
        p.harq->attempts += 1;
        p.harq->gamma_sum = chase_combine(p.harq->gamma_sum, gamma_eff);
    }
    return p.harq->gamma_sum;
}

struct LatencyRecord {
    std::uint64_t id = 0;
    Direction direction = Direction::Dl;
    int cell = 0;
    double arrival_ms = 0.0;
    double total_ms = 0.0;
    double queuing_ms = 0.0;
    double transmission_ms = 0.0;
    double harq_ms = 0.0;
    double processing_ms = 0.0;
};

/// Splits a completed packet's latency into queuing (wait beyond the
/// preparation delay until the first transmission), air time of the final
/// TTI, HARQ/segmentation time between first and last transmission, and
/// processing (preparation plus decoding).
inline LatencyRecord account_latency(const Packet& p, const MacConfig& cfg)
{
    if (!p.completion_ms || !p.first_tx_ms || !p.last_tx_ms) {
        throw std::logic_error("account_latency: packet " + std::to_string(p.id) + " is not complete");
    }
    LatencyRecord r;
    r.id = p.id;
    r.direction = p.direction;
    r.cell = p.cell;
    r.arrival_ms = p.arrival_ms;
    r.total_ms = *p.completion_ms - p.arrival_ms;
    r.processing_ms = cfg.prep_ms() + cfg.decode_ms(p.direction);
    r.transmission_ms = cfg.tti_ms();
    r.harq_ms = *p.last_tx_ms - *p.first_tx_ms;
    r.queuing_ms = r.total_ms - r.processing_ms - r.transmission_ms - r.harq_ms;
    return r;
}

/// Start of the first `d` block of a repeating frame that begins at or after `t_ms`.
inline double next_block_start(const RadioFrameConfig& rfc, Direction d, double t_ms, double symbol_ms)
{
    const double slot_ms = symbol_ms * kSymbolsPerSlot;
    const double frame_ms = slot_ms * rfc.slot_count();
    const double frame_start = std::floor(t_ms / frame_ms + kTimeEps) * frame_ms;
    for (int f = 0; f < 2; ++f) {
        for (int s = 0; s < rfc.slot_count(); ++s) {
            for (const auto& b : rfc.slots[s].blocks()) {
                const double start = frame_start + f * frame_ms + s * slot_ms + b.first_symbol * symbol_ms;
                if (b.direction == d && start >= t_ms - kTimeEps) return start;
            }
        }
    }
    throw std::logic_error("frame has no block in the requested direction");
}

} // namespace tddsim

#endif // TDDSIM_MAC_HPP
