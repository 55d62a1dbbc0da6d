#ifndef TDDSIM_STATS_HPP
#define TDDSIM_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace tddsim {

/// Fraction of `sorted` strictly greater than `x`.
inline double exceedance(std::span<const double> sorted, double x)
{
    if (sorted.empty()) return 0.0;
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

struct CcdfPoint {
    double latency_ms = 0.0;
    double exceedance = 0.0;
};

/// Empirical CCDF sampled at every distinct value for the top `dense_tail`
/// order statistics and at log-spaced exceedance levels elsewhere.
inline std::vector<CcdfPoint> ccdf_table(std::span<const double> sorted, int points_per_decade = 50,
                                         std::size_t dense_tail = 1000)
{
    std::vector<CcdfPoint> out;
    const std::size_t n = sorted.size();
    if (n == 0) return out;
    std::vector<std::size_t> idx; // ascending indices into sorted
    const double decades = std::log10(static_cast<double>(n));
    const int steps = std::max(1, static_cast<int>(std::ceil(decades * points_per_decade)));
    for (int k = 0; k <= steps; ++k) {
        const double p = std::pow(10.0, -decades * k / steps); // exceedance level
        const auto above = static_cast<std::size_t>(std::floor(p * n));
        idx.push_back(n - std::max<std::size_t>(1, std::min(above, n)));
    }
    for (std::size_t i = n > dense_tail ? n - dense_tail : 0; i < n; ++i) idx.push_back(i);
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());

    if (sorted.front() > 0.0) out.push_back({0.0, 1.0});
    double last_x = -1.0;
    for (std::size_t i : idx) {
        const double x = sorted[i];
        if (!out.empty() && x == last_x) continue;
        out.push_back({x, exceedance(sorted, x)});
        last_x = x;
    }
    return out;
}

struct QuantileEstimate {
    double level = 0.0;  ///< target, e.g. 0.999 for 1e-3 exceedance
    double value = 0.0;
    double lower = 0.0;  ///< 95% order-statistic bounds
    double upper = 0.0;
    std::size_t samples = 0;
    std::size_t rank = 0; ///< rank from the top
    bool insufficient_support = false;

    double half_width() const { return 0.5 * (upper - lower); }
};

/// The ceil(n(1-q))-th largest sample, with a 95% normal-approximation
/// binomial interval on its rank.
inline QuantileEstimate quantile(std::span<const double> sorted, double q)
{
    const std::size_t n = sorted.size();
    if (n == 0) throw std::invalid_argument("quantile of an empty sample set");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile level must lie in (0,1)");
    QuantileEstimate e;
    e.level = q;
    e.samples = n;
    const double tail = static_cast<double>(n) * (1.0 - q);
    e.rank = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(tail - 1e-9)), 1, n);
    e.value = sorted[n - e.rank];
    const double spread = 1.96 * std::sqrt(static_cast<double>(n) * q * (1.0 - q));
    const auto rank_at = [&](double r) {
        const auto k = static_cast<std::size_t>(std::clamp(std::ceil(r - 1e-9), 1.0, static_cast<double>(n)));
        return sorted[n - k];
    };
    e.lower = rank_at(static_cast<double>(e.rank) + spread);
    e.upper = rank_at(static_cast<double>(e.rank) - spread);
    e.insufficient_support = tail < 100.0;
    return e;
}

struct SampleSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

inline SampleSummary summarize(std::span<const double> sorted)
{
    SampleSummary s;
    s.count = sorted.size();
    if (sorted.empty()) return s;
    double sum = 0.0;
    for (double x : sorted) sum += x;
    s.mean = sum / static_cast<double>(sorted.size());
    s.min = sorted.front();
    s.max = sorted.back();
    return s;
}

} // namespace tddsim

#endif // TDDSIM_STATS_HPP
