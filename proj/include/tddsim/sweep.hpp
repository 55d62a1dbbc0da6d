#ifndef TDDSIM_SWEEP_HPP
#define TDDSIM_SWEEP_HPP

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tddsim/engine.hpp"
#include "tddsim/output.hpp"
#include "tddsim/random.hpp"
#include "tddsim/scenario.hpp"

namespace tddsim {

/// Seed of replication `rep`. Replication 0 keeps the base seed; the others
/// are split from it, and every point of a sweep reuses the same seeds.
inline std::uint64_t replication_seed(std::uint64_t base, int rep)
{
    return rep == 0 ? base : derive_seed(base, {static_cast<std::uint64_t>(Stream::Replication), std::uint64_t(rep)});
}

/// Folds replication `b` into `a` (records appended in replication order).
inline void merge_into(RunResult& a, const RunResult& b)
{
    a.records.insert(a.records.end(), b.records.begin(), b.records.end());
    a.totals.generated += b.totals.generated;
    a.totals.completed += b.totals.completed;
    a.totals.dropped += b.totals.dropped;
    a.totals.generated_bits += b.totals.generated_bits;
    a.totals.completed_bits += b.totals.completed_bits;
    a.totals.dropped_bits += b.totals.dropped_bits;
    a.residual_packets += b.residual_packets;
    a.measured_dropped += b.measured_dropped;
    a.conserved = a.conserved && b.conserved;
    a.measured_ms += b.measured_ms;
    auto& d = a.diagnostics;
    const auto& e = b.diagnostics;
    d.aligned_calls += e.aligned_calls;
    d.flexible_calls += e.flexible_calls;
    d.cross_link_terms += e.cross_link_terms;
    d.mixed_symbols += e.mixed_symbols;
    d.regularized += e.regularized;
    d.transmissions += e.transmissions;
    d.first_tx += e.first_tx;
    d.first_tx_errors += e.first_tx_errors;
    for (std::size_t i = 0; i < a.rfc_usage.size() && i < b.rfc_usage.size(); ++i) a.rfc_usage[i] += b.rfc_usage[i];
}

/// Runs `reps` replications of `s` on up to `threads` workers and merges them.
inline RunResult run_replications(const Scenario& s, int reps, int threads = 1)
{
    if (reps < 1) throw std::invalid_argument("replications must be >= 1");
    std::vector<std::optional<RunResult>> parts(reps);
    std::vector<std::string> errors(reps);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < reps; r = next++) {
            try {
                Scenario sr = s;
                sr.seed = replication_seed(s.seed, r);
                parts[r] = run(sr);
            } catch (const std::exception& e) {
                errors[r] = e.what();
            }
        }
    };
    const int n = std::clamp(threads, 1, reps);
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (int r = 0; r < reps; ++r) {
        if (!parts[r]) throw SimulationError("replication " + std::to_string(r) + ": " + errors[r]);
    }
    RunResult merged = std::move(*parts[0]);
    for (int r = 1; r < reps; ++r) merge_into(merged, *parts[r]);
    return merged;
}

struct SweepPoint {
    std::string value;
    std::optional<RunResult> result;
    std::string error;
};

inline std::vector<std::string> parse_axis_values(const std::string& values)
{
    std::vector<std::string> out;
    for (auto v : detail::split(values, ',')) {
        if (!v.empty()) out.emplace_back(v);
    }
    if (out.empty()) throw std::invalid_argument("sweep axis has no values");
    return out;
}

/// Runs every axis value. Failed points keep their error and the sweep goes on.
inline std::vector<SweepPoint> sweep(const Scenario& base, const std::string& key, const std::vector<std::string>& values,
                                     int reps, int threads = 1)
{
    if (values.empty()) throw std::invalid_argument("sweep axis has no values");
    get_field(base, key); // unknown keys fail before any run
    std::vector<SweepPoint> points(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        points[i].value = values[i];
        try {
            Scenario s = base;
            set_field(s, key, values[i]);
            validate(s);
            points[i].result = run_replications(s, reps, threads);
        } catch (const std::exception& e) {
            points[i].error = e.what();
        }
    }
    return points;
}

inline void write_sweep(const std::filesystem::path& dir, const std::string& key, const std::vector<SweepPoint>& points)
{
    std::filesystem::create_directories(dir);
    nlohmann::json doc;
    doc["axis"] = key;
    doc["points"] = nlohmann::json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        nlohmann::json j{{"index", i}, {"value", p.value}};
        if (p.result) {
            const auto sub = dir / ("point_" + std::to_string(i));
            write_run(sub, *p.result, false);
            j["directory"] = sub.filename().string();
            j["summary"] = summary_json(*p.result);
        } else {
            j["error"] = p.error;
        }
        doc["points"].push_back(std::move(j));
    }
    std::ofstream(dir / "sweep.json", std::ios::binary) << doc.dump(2) << '\n';
}

} // namespace tddsim

#endif // TDDSIM_SWEEP_HPP
