#ifndef TDDSIM_TRAFFIC_HPP
#define TDDSIM_TRAFFIC_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "tddsim/common.hpp"
#include "tddsim/random.hpp"

namespace tddsim {

/// Open HARQ process for the transport block currently carrying part of a packet.
struct HarqProcess {
    int attempts = 0;        ///< transmissions of this transport block so far
    double gamma_sum = 0.0;  ///< Chase-combined linear SINR
    int mcs = 0;
    int prbs = 0;
    int bits = 0;
};

struct Packet {
    std::uint64_t id = 0;
    Direction direction = Direction::Dl;
    int ue = 0;
    int cell = 0;
    int size_bits = 0;
    int remaining_bits = 0;
    double arrival_ms = 0.0;
    std::optional<double> first_tx_ms;
    std::optional<double> last_tx_ms;
    std::optional<double> completion_ms;
    int harq_attempts = 0; ///< attempts of the open transport block, <= harq_max_attempts

    // Scheduling state.
    double eligible_ms = 0.0; ///< earliest TTI start this packet may use
    bool in_flight = false;
    bool dropped = false;
    std::optional<HarqProcess> harq; ///< set while a failed block awaits retransmission

    bool finished() const { return completion_ms.has_value() || dropped; }
};

struct BufferSample {
    std::int64_t dl_bits = 0;
    std::int64_t ul_bits = 0;
    bool operator==(const BufferSample&) const = default;
};

struct TrafficCounters {
    std::int64_t generated = 0;
    std::int64_t completed = 0;
    std::int64_t dropped = 0;
    std::int64_t generated_bits = 0;
    std::int64_t completed_bits = 0;
    std::int64_t dropped_bits = 0;
};

/// Poisson arrival epochs (ms) over [0, horizon_ms).
inline std::vector<double> generate_arrivals(Rng& rng, double rate_per_s, double horizon_ms)
{
    std::vector<double> out;
    if (rate_per_s <= 0.0) return out;
    const double rate_per_ms = rate_per_s / 1000.0;
    double t = exponential(rng, rate_per_ms);
    while (t < horizon_ms) {
        out.push_back(t);
        t += exponential(rng, rate_per_ms);
    }
    return out;
}

/// Per-cell, per-direction packet queues with exact bit accounting.
class TrafficState {
public:
    explicit TrafficState(int cells) : queues_(cells), counters_(cells) {}

    int cell_count() const { return static_cast<int>(queues_.size()); }

    Packet& enqueue(Packet p)
    {
        p.id = next_id_++;
        p.remaining_bits = p.size_bits;
        auto& c = counters_[p.cell][index(p.direction)];
        c.generated += 1;
        c.generated_bits += p.size_bits;
        auto& q = queues_[p.cell][index(p.direction)];
        q.push_back(std::move(p));
        return q.back();
    }

    std::vector<Packet>& queue(int cell, Direction d) { return queues_[cell][index(d)]; }
    const std::vector<Packet>& queue(int cell, Direction d) const { return queues_[cell][index(d)]; }

    /// Buffered (unserved) bits known to the cell at `at_ms`. UL volume is what
    /// buffer status reports delivered `ul_report_delay_ms` ago reveal.
    BufferSample sample_buffered(int cell, double at_ms, double ul_report_delay_ms = 0.0) const
    {
        BufferSample z;
        for (const auto& p : queues_[cell][index(Direction::Dl)]) {
            if (p.arrival_ms <= at_ms && !p.finished()) z.dl_bits += p.remaining_bits;
        }
        for (const auto& p : queues_[cell][index(Direction::Ul)]) {
            if (p.arrival_ms <= at_ms - ul_report_delay_ms && !p.finished()) z.ul_bits += p.remaining_bits;
        }
        return z;
    }

    void mark_completed(Packet& p, double completion_ms)
    {
        p.completion_ms = completion_ms;
        auto& c = counters_[p.cell][index(p.direction)];
        c.completed += 1;
        c.completed_bits += p.size_bits;
    }

    void mark_dropped(Packet& p)
    {
        p.dropped = true;
        auto& c = counters_[p.cell][index(p.direction)];
        c.dropped += 1;
        c.dropped_bits += p.size_bits;
    }

    /// Erases finished packets. Invalidates references into the queue.
    void purge(int cell, Direction d)
    {
        auto& q = queues_[cell][index(d)];
        q.erase(std::remove_if(q.begin(), q.end(), [](const Packet& p) { return p.finished(); }), q.end());
    }

    const TrafficCounters& counters(int cell, Direction d) const { return counters_[cell][index(d)]; }

    TrafficCounters totals() const
    {
        TrafficCounters t;
        for (const auto& cell : counters_) {
            for (const auto& c : cell) {
                t.generated += c.generated;
                t.completed += c.completed;
                t.dropped += c.dropped;
                t.generated_bits += c.generated_bits;
                t.completed_bits += c.completed_bits;
                t.dropped_bits += c.dropped_bits;
            }
        }
        return t;
    }

    /// Packets still queued and their payload bits.
    std::pair<std::int64_t, std::int64_t> residual() const
    {
        std::int64_t n = 0, bits = 0;
        for (const auto& cell : queues_) {
            for (const auto& q : cell) {
                for (const auto& p : q) {
                    if (!p.finished()) {
                        ++n;
                        bits += p.size_bits;
                    }
                }
            }
        }
        return {n, bits};
    }

    /// generated == completed + dropped + residual, in packets and in bits.
    bool conserved() const
    {
        const auto t = totals();
        const auto [n, bits] = residual();
        return t.generated == t.completed + t.dropped + n && t.generated_bits == t.completed_bits + t.dropped_bits + bits;
    }

private:
    std::vector<std::array<std::vector<Packet>, 2>> queues_;
    std::vector<std::array<TrafficCounters, 2>> counters_;
    std::uint64_t next_id_ = 0;
};

} // namespace tddsim

#endif // TDDSIM_TRAFFIC_HPP
