#ifndef TDDSIM_ENGINE_HPP
#define TDDSIM_ENGINE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tddsim/common.hpp"
#include "tddsim/coordination.hpp"
#include "tddsim/frame.hpp"
#include "tddsim/mac.hpp"
#include "tddsim/phy.hpp"
#include "tddsim/random.hpp"
#include "tddsim/scenario.hpp"
#include "tddsim/stats.hpp"
#include "tddsim/topology.hpp"
#include "tddsim/traffic.hpp"

namespace tddsim {

struct EngineDiagnostics {
    std::int64_t aligned_calls = 0;   ///< receiver evaluations under aligned TDD
    std::int64_t flexible_calls = 0;  ///< receiver evaluations under flexible TDD
    std::int64_t cross_link_terms = 0;
    std::int64_t mixed_symbols = 0;   ///< symbols where some cells are D and others U
    std::int64_t regularized = 0;
    std::int64_t transmissions = 0;
    std::int64_t first_tx_errors = 0;
    std::int64_t first_tx = 0;
};

struct CoordinationTraceRow {
    long frame = 0;
    std::vector<TrafficRatio> mu_bar;
    std::optional<double> theta;
    std::vector<int> rfc;
};

struct SinrTraceRow {
    double time_ms = 0.0;
    int cell = 0;
    Direction direction = Direction::Dl;
    std::uint64_t packet = 0;
    int prbs = 0;
    int mcs = 0;
    double gamma_eff_db = 0.0;
    int attempt = 0;
    bool success = false;
};

struct RunResult {
    Scenario scenario;
    std::vector<LatencyRecord> records; ///< completed packets that arrived after warm-up
    TrafficCounters totals;
    std::int64_t residual_packets = 0;
    std::int64_t measured_dropped = 0;
    bool conserved = false;
    EngineDiagnostics diagnostics;
    std::vector<std::int64_t> rfc_usage; ///< cell-frames per RFC index
    std::vector<std::string> rfc_labels;
    std::vector<CoordinationTraceRow> coordination_trace;
    std::vector<SinrTraceRow> sinr_trace;
    double measured_ms = 0.0;

    std::vector<double> sorted_latencies(std::optional<Direction> d = std::nullopt) const
    {
        std::vector<double> v;
        v.reserve(records.size());
        for (const auto& r : records) {
            if (!d || r.direction == *d) v.push_back(r.total_ms);
        }
        std::sort(v.begin(), v.end());
        return v;
    }

    double drop_rate() const
    {
        const double n = static_cast<double>(records.size() + measured_dropped);
        return n > 0 ? measured_dropped / n : 0.0;
    }

    double carried_mbps() const
    {
        if (measured_ms <= 0.0) return 0.0;
        double bits = 0.0;
        for (const auto& r : records) {
            bits += r.direction == Direction::Dl ? scenario.payload_dl_bits : scenario.payload_ul_bits;
        }
        return bits / (measured_ms * 1e3) / std::max(1, scenario.cell_count);
    }
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Slot-clocked system-level simulation of one scenario.
class Simulator {
public:
    explicit Simulator(Scenario s)
        : s_(std::move(s)), rfcs_((validate(s_), RfcSet(s_.rfc_set, s_.slots_per_frame()))),
          mcs_(2.0, s_.eesm_beta), mac_(MacConfig::from(s_)),
          controller_(s_.policy(), ClusterFilterConfig::from(s_), rfcs_, s_.offered_dl_fraction()),
          xn_(s_.cell_count, s_.xn_delay_ms), traffic_(s_.cell_count)
    {
        Rng topo = make_stream(s_.seed, Stream::Topology);
        topo_ = build_topology(s_, topo);
        fading_ = make_stream(s_.seed, Stream::Fading);
        decoding_ = make_stream(s_.seed, Stream::Decoding);

        const Numerology num = s_.numerology();
        slot_ms_ = num.slot_ms();
        const double subcarrier_bw = 12.0 * s_.scs_hz;
        noise_mw_ = s_.pure_sir ? 0.0 : dbm_to_mw(s_.noise_psd_dbm_hz + linear_to_db(subcarrier_bw) + s_.noise_figure_db);
        prb_power_mw_[index(Direction::Dl)] = dbm_to_mw(s_.bs_power_dbm) / s_.prb_count;
        prb_power_mw_[index(Direction::Ul)] = dbm_to_mw(s_.ue_power_dbm) / s_.prb_count;

        for (const auto& rfc : rfcs_) {
            std::vector<std::vector<Block>> per_slot;
            for (const auto& slot : rfc.slots) per_slot.push_back(slot.blocks());
            blocks_.push_back(std::move(per_slot));
        }

        ues_.resize(topo_.ue_count());
        arrivals_.reserve(topo_.ue_count());
        for (int u = 0; u < topo_.ue_count(); ++u) {
            const auto& info = topo_.ues[u];
            const auto [ldl, lul] = s_.arrival_rates(info.home_cell);
            const double rate = info.direction == Direction::Dl ? ldl : lul;
            Rng rng = make_stream(s_.seed, Stream::Arrivals, static_cast<std::uint64_t>(u));
            const double first = rate > 0.0 ? exponential(rng, rate / 1000.0) : std::numeric_limits<double>::infinity();
            arrivals_.push_back({std::move(rng), rate / 1000.0, first});
            ues_[u].sinr_est_db = initial_sinr_db(u);
        }
        rfc_.assign(s_.cell_count, 0);
        const auto init = controller_.initial(s_.cell_count);
        std::copy(init.begin(), init.end(), rfc_.begin());
        samples_.assign(s_.cell_count, {});
    }

    const Topology& topology() const { return topo_; }
    const RfcSet& rfc_set() const { return rfcs_; }

    RunResult run()
    {
        RunResult res;
        res.scenario = s_;
        res.rfc_usage.assign(rfcs_.size(), 0);
        for (const auto& r : rfcs_) res.rfc_labels.push_back(r.label.str());

        const int spf = s_.slots_per_frame();
        const int frames_per_update = s_.frames_per_update();
        const long total_slots = static_cast<long>(std::ceil((s_.sim_duration_ms + s_.drain_ms) / slot_ms_ - kTimeEps));
        long period = 0;

        for (long n = 0; n < total_slots; ++n) {
            const double t = n * slot_ms_;
            const int slot = static_cast<int>(n % spf);
            const long frame = n / spf;
            try {
                if (slot == 0) {
                    if (frame > 0 && frame % frames_per_update == 0) {
                        end_period(t, period++, frame, res);
                    }
                    for (int c = 0; c < s_.cell_count; ++c) res.rfc_usage[rfc_[c]] += 1;
                }
                admit_arrivals(t + slot_ms_);
                sample_ratios(t);
                run_slot(t, slot, res);
            } catch (const std::exception& e) {
                throw SimulationError("frame " + std::to_string(frame) + ", slot " + std::to_string(slot) + ": " +
                                      e.what());
            }
        }

        res.totals = traffic_.totals();
        res.residual_packets = traffic_.residual().first;
        res.conserved = traffic_.conserved();
        res.measured_ms = s_.sim_duration_ms - s_.warmup_ms;
        if (!res.conserved) throw SimulationError("packet conservation violated");
        return res;
    }

private:
    struct ArrivalStream {
        Rng rng;
        double rate_per_ms;
        double next_ms;
    };

    struct TxGroup {
        int cell;
        Block block;
        double start_ms;
        std::vector<Allocation> allocs;
    };

    /// Wideband geometry SINR with every other cell transmitting in the same
    /// direction on the same PRB; outer-loop offsets refine it per UE.
    double initial_sinr_db(int u) const
    {
        const auto& info = topo_.ues[u];
        const int serving = info.serving_cell;
        const NodeId ue = topo_.ue_node(u);
        const NodeId bs = topo_.cell_node(serving);
        const double p = prb_power_mw_[index(info.direction)];
        double interference = 0.0;
        for (int c = 0; c < topo_.cell_count(); ++c) {
            if (c == serving) continue;
            if (info.direction == Direction::Dl) {
                interference += p * topo_.gain_linear(topo_.cell_node(c), ue);
            } else {
                const auto& others = topo_.served(c, Direction::Ul);
                if (others.empty()) continue;
                double sum = 0.0;
                for (int v : others) sum += topo_.gain_linear(topo_.ue_node(v), bs);
                interference += p * sum / static_cast<double>(others.size());
            }
        }
        const double array = std::pow(std::sqrt(double(s_.tx_antennas)) + std::sqrt(double(s_.rx_antennas)), 2.0);
        const double denom = noise_mw_ + interference;
        return linear_to_db(p * topo_.gain_linear(bs, ue) * array / (denom > 0.0 ? denom : 1e-30));
    }

    void admit_arrivals(double until_ms)
    {
        const double horizon = std::min(until_ms, s_.sim_duration_ms);
        for (int u = 0; u < static_cast<int>(arrivals_.size()); ++u) {
            auto& a = arrivals_[u];
            while (a.next_ms < horizon) {
                const auto& info = topo_.ues[u];
                Packet p;
                p.direction = info.direction;
                p.ue = u;
                p.cell = info.serving_cell;
                p.size_bits = info.direction == Direction::Dl ? s_.payload_dl_bits : s_.payload_ul_bits;
                p.arrival_ms = a.next_ms;
                p.eligible_ms = a.next_ms + mac_.prep_ms();
                traffic_.enqueue(std::move(p));
                a.next_ms += exponential(a.rng, a.rate_per_ms);
            }
        }
    }

    void sample_ratios(double t)
    {
        for (int c = 0; c < s_.cell_count; ++c) {
            const auto z = traffic_.sample_buffered(c, t, s_.ul_report_delay_ms);
            samples_[c].push_back(traffic_ratio(static_cast<double>(z.dl_bits), static_cast<double>(z.ul_bits)));
        }
    }

    void end_period(double t, long period, long frame, RunResult& res)
    {
        for (int c = 0; c < s_.cell_count; ++c) {
            xn_.send(c, frame_average(samples_[c]), period, t);
            samples_[c].clear();
        }
        const auto reports = xn_.collect(t);
        const auto d = controller_.decide(reports);
        rfc_ = d.rfc_per_cell;
        if (s_.trace_coordination) res.coordination_trace.push_back({frame, reports, d.theta, rfc_});
    }

    static int overlap(const Block& a, const Block& b)
    {
        return std::max(0, std::min(a.end_symbol(), b.end_symbol()) - std::max(a.first_symbol, b.first_symbol));
    }

    void run_slot(double t, int slot, RunResult& res)
    {
        const int cells = s_.cell_count;

        // Cluster-wide direction of every symbol.
        std::array<bool, kSymbolsPerSlot> mixed{};
        {
            std::array<bool, kSymbolsPerSlot> any_d{}, any_u{};
            for (int c = 0; c < cells; ++c) {
                const auto& fmt = rfcs_[rfc_[c]].slots[slot];
                for (int k = 0; k < kSymbolsPerSlot; ++k) {
                    any_d[k] = any_d[k] || fmt[k] == Symbol::Downlink;
                    any_u[k] = any_u[k] || fmt[k] == Symbol::Uplink;
                }
            }
            for (int k = 0; k < kSymbolsPerSlot; ++k) {
                mixed[k] = any_d[k] && any_u[k];
                res.diagnostics.mixed_symbols += mixed[k];
            }
        }
        if (!std::holds_alternative<DynamicTddPolicy>(controller_.policy())) {
            for (bool m : mixed) {
                if (m) throw std::logic_error("cells disagree on a symbol direction under a common-frame policy");
            }
        }

        std::vector<TxGroup> groups;
        for (int c = 0; c < cells; ++c) {
            const auto& fmt = rfcs_[rfc_[c]].slots[slot];
            for (const Block& b : blocks_[rfc_[c]][slot]) {
                for (int k = b.first_symbol; k < b.end_symbol(); ++k) {
                    const Symbol want = b.direction == Direction::Dl ? Symbol::Downlink : Symbol::Uplink;
                    if (fmt[k] != want) throw std::logic_error("block direction does not match its symbols");
                }
                const double start = t + b.first_symbol * mac_.symbol_ms;
                auto allocs = schedule_tti(traffic_.queue(c, b.direction), start, mac_, ues_, mcs_);
                update_pf_averages(topo_.served(c, b.direction), allocs, ues_, mac_);
                if (!allocs.empty()) groups.push_back({c, b, start, std::move(allocs)});
            }
        }

        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const auto& g = groups[gi];
            bool flexible = false;
            for (int k = g.block.first_symbol; k < g.block.end_symbol(); ++k) flexible = flexible || mixed[k];
            for (const auto& a : g.allocs) transmit(groups, gi, a, flexible, res);
        }

        for (int c = 0; c < cells; ++c) {
            traffic_.purge(c, Direction::Dl);
            traffic_.purge(c, Direction::Ul);
        }
    }

    struct ActiveInterferer {
        int first_prb;
        int end_prb;
        int first_subband;
        std::vector<Interferer> per_subband;
    };

    void transmit(const std::vector<TxGroup>& groups, std::size_t gi, const Allocation& a, bool flexible,
                  RunResult& res)
    {
        const TxGroup& g = groups[gi];
        const Direction dir = g.block.direction;
        Packet& p = *a.packet;
        const int sb_size = s_.prb_per_subband;
        const int sb_first = a.first_prb / sb_size;
        const int sb_last = (a.end_prb() - 1) / sb_size;

        const NodeId bs = topo_.cell_node(g.cell);
        const NodeId ue = topo_.ue_node(p.ue);
        const NodeId rx = dir == Direction::Dl ? ue : bs;
        const int rx_dim = dir == Direction::Dl ? s_.rx_antennas : s_.tx_antennas;
        const int tx_dim = dir == Direction::Dl ? s_.tx_antennas : s_.rx_antennas;
        const double serving_gain = topo_.gain_linear(bs, ue);

        std::vector<CVector> serving;
        for (int sb = sb_first; sb <= sb_last; ++sb) {
            const CMatrix h = draw_channel(fading_, rx_dim, tx_dim, serving_gain);
            serving.push_back(h * precode(h));
        }

        // Interferers: other cells' allocations overlapping in time and frequency.
        // An interferer's precoder is independent of its channel to this
        // receiver, so the effective vector is i.i.d. CN(0, gain).
        std::vector<ActiveInterferer> active;
        const bool cli_free = s_.cli_free && std::holds_alternative<DynamicTddPolicy>(controller_.policy());
        for (std::size_t hj = 0; hj < groups.size(); ++hj) {
            const auto& other = groups[hj];
            if (other.cell == g.cell) continue;
            const int ov = overlap(g.block, other.block);
            if (ov == 0) continue;
            const bool cross = other.block.direction != dir;
            if (cross && cli_free) continue;
            for (const auto& b : other.allocs) {
                const int lo = std::max(a.first_prb, b.first_prb);
                const int hi = std::min(a.end_prb(), b.end_prb());
                if (lo >= hi) continue;
                const NodeId tx = other.block.direction == Direction::Dl ? topo_.cell_node(other.cell)
                                                                         : topo_.ue_node(b.packet->ue);
                const double gain = topo_.gain_linear(tx, rx);
                const double power = prb_power_mw_[index(other.block.direction)] * ov / kTtiSymbols;
                ActiveInterferer ai{lo, hi, lo / sb_size, {}};
                for (int sb = lo / sb_size; sb <= (hi - 1) / sb_size; ++sb) {
                    ai.per_subband.push_back({draw_vector(fading_, rx_dim, gain), power,
                                              cross ? InterferenceClass::CrossLink : InterferenceClass::SameLink});
                }
                active.push_back(std::move(ai));
            }
        }

        const TddMode mode = flexible ? TddMode::Flexible : TddMode::Aligned;
        const double power = prb_power_mw_[index(dir)];
        std::vector<double> gamma(a.prb_count);
        std::vector<int> prev_set;
        std::vector<int> set;
        std::vector<Interferer> list;
        int prev_sb = -1;
        for (int prb = a.first_prb; prb < a.end_prb(); ++prb) {
            const int sb = prb / sb_size;
            set.clear();
            for (int i = 0; i < static_cast<int>(active.size()); ++i) {
                if (prb >= active[i].first_prb && prb < active[i].end_prb) set.push_back(i);
            }
            if (sb == prev_sb && set == prev_set) {
                gamma[prb - a.first_prb] = gamma[prb - a.first_prb - 1];
                continue;
            }
            list.clear();
            for (int i : set) {
                const auto& itf = active[i].per_subband[sb - active[i].first_subband];
                list.push_back(itf);
                res.diagnostics.cross_link_terms += itf.kind == InterferenceClass::CrossLink;
            }
            const auto out = post_sinr(serving[sb - sb_first], power, list, mode, noise_mw_);
            (flexible ? res.diagnostics.flexible_calls : res.diagnostics.aligned_calls) += 1;
            res.diagnostics.regularized += out.regularized;
            gamma[prb - a.first_prb] = out.sinr;
            prev_sb = sb;
            prev_set = set;
        }

        const double gamma_eff = effective_sinr(gamma, mcs_[a.mcs].eesm_beta);
        const double gamma_sum = accumulate_harq(p, a, gamma_eff);
        const int attempt = p.harq->attempts;
        const bool ok = decode(gamma_sum, mcs_[a.mcs], s_.decode_margin_sigma_db, decoding_);
        res.diagnostics.transmissions += 1;
        if (!a.retransmission) {
            res.diagnostics.first_tx += 1;
            res.diagnostics.first_tx_errors += !ok;
        }
        if (s_.trace_sinr) {
            res.sinr_trace.push_back({g.start_ms, g.cell, dir, p.id, a.prb_count, a.mcs, linear_to_db(gamma_eff), attempt, ok});
        }

        const bool measured = p.arrival_ms >= s_.warmup_ms && p.arrival_ms < s_.sim_duration_ms;
        switch (harq_step(p, a, ok, g.start_ms, mac_, ues_[p.ue])) {
        case HarqOutcome::Completed:
            traffic_.mark_completed(p, *p.completion_ms);
            if (measured) res.records.push_back(account_latency(p, mac_));
            break;
        case HarqOutcome::Dropped:
            traffic_.mark_dropped(p);
            if (measured) res.measured_dropped += 1;
            break;
        default: break;
        }
    }

    Scenario s_;
    RfcSet rfcs_;
    McsTable mcs_;
    MacConfig mac_;
    RfcController controller_;
    XnExchange xn_;
    TrafficState traffic_;
    Topology topo_;
    Rng fading_;
    Rng decoding_;
    double slot_ms_ = 0.5;
    double noise_mw_ = 0.0;
    std::array<double, 2> prb_power_mw_{};
    std::vector<std::vector<std::vector<Block>>> blocks_; ///< [rfc][slot]
    std::vector<UeLinkState> ues_;
    std::vector<ArrivalStream> arrivals_;
    std::vector<int> rfc_;
    std::vector<std::vector<TrafficRatio>> samples_;
};

inline RunResult run(const Scenario& s) { return Simulator(s).run(); }

} // namespace tddsim

#endif // TDDSIM_ENGINE_HPP
