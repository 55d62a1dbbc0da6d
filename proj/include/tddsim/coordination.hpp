#ifndef TDDSIM_COORDINATION_HPP
#define TDDSIM_COORDINATION_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "tddsim/frame.hpp"
#include "tddsim/scenario.hpp"

namespace tddsim {

/// A cell's DL share of buffered bits; nullopt marks a cell with nothing buffered.
using TrafficRatio = std::optional<double>;

inline TrafficRatio traffic_ratio(double z_dl, double z_ul)
{
    if (z_dl < 0 || z_ul < 0) throw std::invalid_argument("buffered volumes must be non-negative");
    const double sum = z_dl + z_ul;
    if (sum <= 0.0) return std::nullopt;
    return z_dl / sum;
}

/// Mean of the present per-slot samples; nullopt if every slot was idle.
inline TrafficRatio frame_average(std::span<const TrafficRatio> samples)
{
    double sum = 0.0;
    int n = 0;
    for (const auto& s : samples) {
        if (s) {
            sum += *s;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

// Kaiser window ---------------------------------------------------------------

/// exp(-x) * I0(x), x >= 0. Power series below 25, Hankel asymptotic
/// expansion above; both keep ~1e-15 relative accuracy without overflow.
inline double bessel_i0_scaled(double x)
{
    x = std::abs(x);
    if (x < 25.0) {
        const double q = 0.25 * x * x;
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 500; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < sum * 1e-17) break;
        }
        return sum * std::exp(-x);
    }
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
        if (next > term) break; // series starts diverging
        term = next;
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

inline double bessel_i0(double x) { return bessel_i0_scaled(x) * std::exp(std::abs(x)); }

enum class WindowShape {
    Mirrored,  ///< descending half: peak at l = 0
    Symmetric, ///< textbook Kaiser: peak at l = L/2
};

/// Kaiser weights w[0..L], normalized by I0(beta).
inline std::vector<double> kaiser_weights(int L, double beta, WindowShape shape = WindowShape::Mirrored)
{
    if (L < 0) throw std::invalid_argument("window length must be >= 1");
    if (beta < 0) throw std::invalid_argument("beta must be >= 0");
    std::vector<double> w(static_cast<std::size_t>(L) + 1, 1.0);
    if (L == 0) return w;
    const double denom = bessel_i0_scaled(beta);
    for (int l = 0; l <= L; ++l) {
        const double r = shape == WindowShape::Mirrored ? static_cast<double>(l) / L : 2.0 * l / L - 1.0;
        const double arg = beta * std::sqrt(std::max(0.0, 1.0 - r * r));
        // I0(arg)/I0(beta) = exp(arg - beta) * scaled(arg) / scaled(beta)
        w[l] = std::exp(arg - beta) * bessel_i0_scaled(arg) / denom;
    }
    return w;
}

// Sorting and filtering -------------------------------------------------------

struct RankedRatio {
    int cell = 0;
    double ratio = 0.5;
    double distance = 0.0;
};

/// Orders cells by descending |ratio - balance|, ties by ascending cell id.
/// Idle cells vote `balance`, so they sort last with distance 0.
inline std::vector<RankedRatio> sort_reports(std::span<const TrafficRatio> mu_bar, double balance = 0.5)
{
    std::vector<RankedRatio> out;
    out.reserve(mu_bar.size());
    for (std::size_t c = 0; c < mu_bar.size(); ++c) {
        const double v = mu_bar[c].value_or(balance);
        out.push_back({static_cast<int>(c), v, std::abs(v - balance)});
    }
    std::stable_sort(out.begin(), out.end(), [](const RankedRatio& a, const RankedRatio& b) {
        if (a.distance != b.distance) return a.distance > b.distance;
        return a.cell < b.cell;
    });
    return out;
}

/// Window-weighted mean of the ordered ratios.
inline double filter_theta(std::span<const double> ordered, std::span<const double> weights)
{
    if (ordered.size() != weights.size() || ordered.empty()) {
        throw std::invalid_argument("ordered ratios and window weights must have equal, non-zero length");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t l = 0; l < ordered.size(); ++l) {
        num += ordered[l] * weights[l];
        den += weights[l];
    }
    return num / den;
}

struct ClusterFilterConfig {
    double beta_hat = 0.9;
    double beta_max = 100.0;
    WindowShape shape = WindowShape::Mirrored;
    bool balance_from_mean = false;

    double beta() const { return beta_hat * beta_max; }

    static ClusterFilterConfig from(const Scenario& s)
    {
        return {s.beta_hat, s.beta_max, s.kaiser_mirrored ? WindowShape::Mirrored : WindowShape::Symmetric,
                s.balance_from_mean};
    }
};

struct ClusterFilterResult {
    std::optional<double> theta; ///< nullopt when every cell was idle
    std::vector<RankedRatio> ordered;
    std::vector<double> weights;
    double balance = 0.5;
};

/// Sort by distance from balance, weight with the window, average.
inline ClusterFilterResult filter_cluster(std::span<const TrafficRatio> mu_bar, const ClusterFilterConfig& cfg)
{
    ClusterFilterResult r;
    if (mu_bar.empty()) throw std::invalid_argument("no reports");
    if (cfg.balance_from_mean) {
        if (auto m = frame_average(mu_bar)) r.balance = *m;
    }
    if (std::none_of(mu_bar.begin(), mu_bar.end(), [](const TrafficRatio& v) { return v.has_value(); })) {
        return r;
    }
    r.ordered = sort_reports(mu_bar, r.balance);
    r.weights = kaiser_weights(static_cast<int>(mu_bar.size()) - 1, cfg.beta(), cfg.shape);
    std::vector<double> psi(r.ordered.size());
    std::transform(r.ordered.begin(), r.ordered.end(), psi.begin(), [](const RankedRatio& x) { return x.ratio; });
    r.theta = filter_theta(psi, r.weights);
    return r;
}

// Policies --------------------------------------------------------------------

/// sTDD target DL share: offered share shifted by alpha * 0.5 toward `bias`.
inline int static_rfc(const StaticTddPolicy& p, double offered_dl_fraction, const RfcSet& set)
{
    if (p.fixed_ratio) return set.find(*p.fixed_ratio);
    const double shift = 0.5 * p.alpha * (p.bias == Direction::Dl ? 1.0 : -1.0);
    return quantize_theta(std::clamp(offered_dl_fraction + shift, 0.0, 1.0), set);
}

struct RfcDecision {
    std::vector<int> rfc_per_cell;
    std::optional<double> theta; ///< cluster ratio, Proposed only
};

/// Maps one round of frame-averaged reports to the RFC each cell adopts.
class RfcController {
public:
    RfcController(TddPolicy policy, ClusterFilterConfig filter, const RfcSet& set, double offered_dl_fraction)
        : policy_(policy), filter_(filter), set_(&set)
    {
        if (const auto* s = std::get_if<StaticTddPolicy>(&policy_)) {
            static_index_ = static_rfc(*s, offered_dl_fraction, set);
        }
    }

    /// RFCs in force before any report exists.
    std::vector<int> initial(int cells) const
    {
        return std::vector<int>(cells, static_index_.value_or(set_->default_index()));
    }

    RfcDecision decide(std::span<const TrafficRatio> mu_bar) const
    {
        const int cells = static_cast<int>(mu_bar.size());
        RfcDecision d;
        if (static_index_) {
            d.rfc_per_cell.assign(cells, *static_index_);
        } else if (std::holds_alternative<DynamicTddPolicy>(policy_)) {
            d.rfc_per_cell.resize(cells);
            for (int c = 0; c < cells; ++c) {
                d.rfc_per_cell[c] = mu_bar[c] ? quantize_theta(*mu_bar[c], *set_) : set_->default_index();
            }
        } else {
            const auto r = filter_cluster(mu_bar, filter_);
            d.theta = r.theta;
            d.rfc_per_cell.assign(cells, r.theta ? quantize_theta(*r.theta, *set_) : set_->default_index());
        }
        return d;
    }

    const TddPolicy& policy() const { return policy_; }

private:
    TddPolicy policy_;
    ClusterFilterConfig filter_;
    const RfcSet* set_;
    std::optional<int> static_index_;
};

/// Per-frame averaged ratio exchanged between cells.
struct RatioReport {
    int cell = 0;
    TrafficRatio mu_bar;
    long frame = 0;
    double delivery_ms = 0.0;
};

/// Backhaul exchange with a fixed one-way delay. Each cell keeps the newest
/// report it has received from every peer.
class XnExchange {
public:
    XnExchange(int cells, double delay_ms) : delay_ms_(delay_ms), latest_(cells) {}

    void send(int cell, TrafficRatio mu_bar, long frame, double sent_ms)
    {
        in_transit_.push_back({cell, mu_bar, frame, sent_ms + delay_ms_});
    }

    /// Delivers everything due by `now_ms` and returns the newest value per cell.
    std::vector<TrafficRatio> collect(double now_ms)
    {
        while (!in_transit_.empty() && in_transit_.front().delivery_ms <= now_ms + 1e-9) {
            const auto& r = in_transit_.front();
            latest_[r.cell] = r;
            in_transit_.pop_front();
        }
        std::vector<TrafficRatio> out(latest_.size());
        for (std::size_t c = 0; c < latest_.size(); ++c) {
            if (latest_[c]) out[c] = latest_[c]->mu_bar;
        }
        return out;
    }

    bool any_received() const
    {
        return std::any_of(latest_.begin(), latest_.end(), [](const auto& r) { return r.has_value(); });
    }

private:
    double delay_ms_;
    std::deque<RatioReport> in_transit_;
    std::vector<std::optional<RatioReport>> latest_;
};

} // namespace tddsim

#endif // TDDSIM_COORDINATION_HPP
