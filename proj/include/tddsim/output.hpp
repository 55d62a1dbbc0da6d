#ifndef TDDSIM_OUTPUT_HPP
#define TDDSIM_OUTPUT_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tddsim/engine.hpp"
#include "tddsim/stats.hpp"

namespace tddsim {

namespace detail {

inline std::string fmt(double v, int precision = 9)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p)
{
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
}

inline nlohmann::json quantile_json(const QuantileEstimate& q)
{
    return {{"level", q.level},
            {"value_ms", q.value},
            {"lower_ms", q.lower},
            {"upper_ms", q.upper},
            {"samples", q.samples},
            {"rank_from_top", q.rank},
            {"insufficient_support", q.insufficient_support}};
}

} // namespace detail

inline nlohmann::json latency_json(const std::vector<double>& sorted, const std::vector<double>& targets)
{
    nlohmann::json j;
    const auto s = summarize(sorted);
    j["samples"] = s.count;
    if (s.count == 0) return j;
    j["mean_ms"] = s.mean;
    j["min_ms"] = s.min;
    j["max_ms"] = s.max;
    j["quantiles"] = nlohmann::json::array();
    for (double q : targets) j["quantiles"].push_back(detail::quantile_json(quantile(sorted, q)));
    return j;
}

inline nlohmann::json summary_json(const RunResult& r)
{
    nlohmann::json j;
    j["policy"] = policy_name(r.scenario.policy());
    j["seed"] = r.scenario.seed;
    j["cells"] = r.scenario.cell_count;
    j["offered_dl_fraction"] = r.scenario.offered_dl_fraction();
    j["packets"] = {{"generated", r.totals.generated},
                    {"completed", r.totals.completed},
                    {"dropped", r.totals.dropped},
                    {"residual", r.residual_packets},
                    {"conserved", r.conserved},
                    {"measured_completed", r.records.size()},
                    {"measured_dropped", r.measured_dropped}};
    j["drop_rate"] = r.drop_rate();
    j["carried_mbps_per_cell"] = r.carried_mbps();
    const auto& t = r.scenario.quantile_targets;
    j["latency"] = {{"all", latency_json(r.sorted_latencies(), t)},
                    {"dl", latency_json(r.sorted_latencies(Direction::Dl), t)},
                    {"ul", latency_json(r.sorted_latencies(Direction::Ul), t)}};
    const auto& d = r.diagnostics;
    j["diagnostics"] = {{"aligned_receiver_calls", d.aligned_calls},
                        {"flexible_receiver_calls", d.flexible_calls},
                        {"cross_link_terms", d.cross_link_terms},
                        {"mixed_direction_symbols", d.mixed_symbols},
                        {"regularized_receivers", d.regularized},
                        {"transmissions", d.transmissions},
                        {"first_tx_bler", d.first_tx ? double(d.first_tx_errors) / d.first_tx : 0.0}};
    nlohmann::json usage = nlohmann::json::object();
    for (std::size_t i = 0; i < r.rfc_labels.size(); ++i) usage[r.rfc_labels[i]] = r.rfc_usage[i];
    j["rfc_cell_frames"] = usage;
    std::vector<std::string> warnings;
    for (double q : t) {
        if (!r.records.empty() && quantile(r.sorted_latencies(), q).insufficient_support) {
            warnings.push_back("quantile " + detail::format_double(q) + " has fewer than 100 tail samples");
        }
    }
    if (r.records.empty()) warnings.push_back("no latency samples");
    j["warnings"] = warnings;
    return j;
}

inline void write_latency_csv(const std::filesystem::path& p, const std::vector<LatencyRecord>& records)
{
    auto f = detail::open_out(p);
    f << "packet_id,direction,cell,arrival_ms,total_ms,queuing_ms,transmission_ms,harq_ms,processing_ms\n";
    for (const auto& r : records) {
        f << r.id << ',' << to_string(r.direction) << ',' << r.cell << ',' << detail::fmt(r.arrival_ms) << ','
          << detail::fmt(r.total_ms) << ',' << detail::fmt(r.queuing_ms) << ',' << detail::fmt(r.transmission_ms)
          << ',' << detail::fmt(r.harq_ms) << ',' << detail::fmt(r.processing_ms) << '\n';
    }
}

inline void write_ccdf_csv(const std::filesystem::path& p, const RunResult& r)
{
    auto f = detail::open_out(p);
    f << "direction,latency_ms,exceedance\n";
    const std::pair<const char*, std::optional<Direction>> sets[] = {
        {"all", std::nullopt}, {"DL", Direction::Dl}, {"UL", Direction::Ul}};
    for (const auto& [name, dir] : sets) {
        const auto sorted = r.sorted_latencies(dir);
        for (const auto& pt : ccdf_table(sorted)) {
            f << name << ',' << detail::fmt(pt.latency_ms) << ',' << detail::fmt(pt.exceedance, 12) << '\n';
        }
    }
}

inline void write_coordination_csv(const std::filesystem::path& p, const RunResult& r)
{
    auto f = detail::open_out(p);
    f << "frame";
    for (int c = 0; c < r.scenario.cell_count; ++c) f << ",mu_bar_" << c;
    f << ",theta,rfc\n";
    for (const auto& row : r.coordination_trace) {
        f << row.frame;
        for (const auto& m : row.mu_bar) f << ',' << (m ? detail::fmt(*m, 6) : std::string("none"));
        f << ',' << (row.theta ? detail::fmt(*row.theta, 6) : std::string("none")) << ',';
        bool common = std::all_of(row.rfc.begin(), row.rfc.end(), [&](int x) { return x == row.rfc.front(); });
        if (common) {
            f << r.rfc_labels[row.rfc.front()];
        } else {
            for (std::size_t c = 0; c < row.rfc.size(); ++c) f << (c ? ";" : "") << r.rfc_labels[row.rfc[c]];
        }
        f << '\n';
    }
}

inline void write_sinr_csv(const std::filesystem::path& p, const RunResult& r)
{
    auto f = detail::open_out(p);
    f << "time_ms,cell,direction,packet_id,prbs,mcs,gamma_eff_db,attempt,success\n";
    for (const auto& s : r.sinr_trace) {
        f << detail::fmt(s.time_ms) << ',' << s.cell << ',' << to_string(s.direction) << ',' << s.packet << ','
          << s.prbs << ',' << s.mcs << ',' << detail::fmt(s.gamma_eff_db, 4) << ',' << s.attempt << ','
          << (s.success ? 1 : 0) << '\n';
    }
}

/// Writes the result directory of one run.
inline void write_run(const std::filesystem::path& dir, const RunResult& r, bool latency_rows = true)
{
    std::filesystem::create_directories(dir);
    detail::open_out(dir / "scenario.resolved") << to_text(r.scenario);
    if (latency_rows) write_latency_csv(dir / "latency.csv", r.records);
    write_ccdf_csv(dir / "ccdf.csv", r);
    detail::open_out(dir / "summary.json") << summary_json(r).dump(2) << '\n';
    if (r.scenario.trace_coordination) write_coordination_csv(dir / "coordination_trace.csv", r);
    if (r.scenario.trace_sinr) write_sinr_csv(dir / "sinr_trace.csv", r);
}

} // namespace tddsim

#endif // TDDSIM_OUTPUT_HPP
