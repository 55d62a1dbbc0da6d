#ifndef TDDSIM_SCENARIO_HPP
#define TDDSIM_SCENARIO_HPP

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tddsim/common.hpp"
#include "tddsim/frame.hpp"

namespace tddsim {

class ScenarioError : public std::runtime_error {
public:
    enum class Kind { Parse, Validation };

    ScenarioError(Kind kind, std::string field, const std::string& message)
        : std::runtime_error((kind == Kind::Parse ? "parse error" : "validation error") +
                             (field.empty() ? std::string() : " [" + field + "]") + ": " + message),
          kind_(kind), field_(std::move(field))
    {
    }

    Kind kind() const { return kind_; }
    const std::string& field() const { return field_; }

private:
    Kind kind_;
    std::string field_;
};

// TDD policy variants --------------------------------------------------------

/// Cluster-wide common RFC from the filtered traffic ratio.
struct ProposedPolicy {
    bool operator==(const ProposedPolicy&) const = default;
};

/// One RFC for the whole run. `alpha` is the normalized mismatch against the
/// offered DL share; `fixed_ratio` bypasses the offered-load match entirely.
struct StaticTddPolicy {
    double alpha = 0.0;
    Direction bias = Direction::Dl;
    std::optional<RatioLabel> fixed_ratio;
    bool operator==(const StaticTddPolicy&) const = default;
};

/// Each cell picks its own RFC. With `cli_free` the cross-link terms are dropped.
struct DynamicTddPolicy {
    bool cli_free = false;
    bool operator==(const DynamicTddPolicy&) const = default;
};

using TddPolicy = std::variant<ProposedPolicy, StaticTddPolicy, DynamicTddPolicy>;

inline std::string policy_name(const TddPolicy& p)
{
    struct Visitor {
        std::string operator()(const ProposedPolicy&) const { return "proposed"; }
        std::string operator()(const StaticTddPolicy& s) const
        {
            if (s.fixed_ratio) return "stdd(" + s.fixed_ratio->str() + ")";
            std::ostringstream os;
            os << "stdd(alpha=" << s.alpha << ")";
            return os.str();
        }
        std::string operator()(const DynamicTddPolicy& d) const { return d.cli_free ? "dtdd-cli-free" : "dtdd-cli"; }
    };
    return std::visit(Visitor{}, p);
}

enum class PolicyKind { Proposed, Static, Dynamic };

struct ProcessingDelays {
    double prep_symbols = 3.0;
    double pdsch_decode_symbols = 4.5;
    double pusch_decode_symbols = 5.5;

    double decode_symbols(Direction d) const { return d == Direction::Dl ? pdsch_decode_symbols : pusch_decode_symbols; }
};

struct Scenario {
    // Layout
    int cell_count = 21;
    double inter_site_distance_m = 500.0;
    int sectors_per_site = 3;
    int ue_per_cell_dl = 10;
    int ue_per_cell_ul = 10;
    int tx_antennas = 8;
    int rx_antennas = 2;

    // Carrier
    double bandwidth_hz = 10e6;
    double scs_hz = 30e3;
    double carrier_freq_hz = 3.5e9;
    int prb_count = 24;
    int prb_per_subband = 4;
    int data_re_per_prb = 36;

    // Traffic (rates are per UE)
    int payload_dl_bits = 400;
    int payload_ul_bits = 400;
    double arrival_rate_dl = 125.0;
    double arrival_rate_ul = 125.0;
    std::optional<double> offered_load_mbps; ///< per cell, overrides the rates when set
    double dl_share = 0.5;                   ///< used with offered_load_mbps
    std::vector<RatioLabel> cell_load_ratios; ///< per-cell DL:UL offered split, cycled over cells

    // Coordination
    PolicyKind policy_kind = PolicyKind::Proposed;
    double static_alpha = 0.0;
    Direction static_bias = Direction::Dl;
    std::optional<RatioLabel> static_ratio;
    bool cli_free = false;
    double beta_hat = 0.9;
    double beta_max = 100.0;
    bool kaiser_mirrored = true;
    bool balance_from_mean = false;
    std::vector<RatioLabel> rfc_set = RfcSet::default_labels();
    double rfc_update_period_ms = 10.0;
    double xn_delay_ms = 0.0;
    double ul_report_delay_ms = 0.0;

    // Run control
    double sim_duration_ms = 1000.0;
    double warmup_ms = 100.0;
    double drain_ms = 50.0;
    std::uint64_t seed = 1;
    std::vector<double> quantile_targets = {0.99, 0.999, 0.99999};

    // Processing and HARQ
    double prep_symbols = 3.0;
    double pdsch_decode_symbols = 4.5;
    double pusch_decode_symbols = 5.5;
    int harq_max_attempts = 4;

    // Radio
    double bs_power_dbm = 46.0;
    double ue_power_dbm = 23.0;
    double noise_psd_dbm_hz = -174.0;
    double noise_figure_db = 9.0;
    bool pure_sir = false;
    double pathloss_exponent = 3.76;
    double pathloss_ref_m = 35.0;
    double bs_bs_pathloss_exponent = 2.5;
    double ue_ue_pathloss_exponent = 3.76;
    double shadowing_sigma_db = 8.0;

    // Link adaptation and scheduling
    double bler_target = 0.1;
    double olla_step_db = 0.05;
    double decode_margin_sigma_db = 1.0;
    double eesm_beta = 1.0;
    double pf_window_tti = 100.0;

    // Traces
    bool trace_coordination = false;
    bool trace_sinr = false;

    TddPolicy policy() const
    {
        switch (policy_kind) {
        case PolicyKind::Proposed: return ProposedPolicy{};
        case PolicyKind::Static: return StaticTddPolicy{static_alpha, static_bias, static_ratio};
        case PolicyKind::Dynamic: return DynamicTddPolicy{cli_free};
        }
        return ProposedPolicy{};
    }

    void set_policy(const TddPolicy& p)
    {
        if (std::holds_alternative<ProposedPolicy>(p)) {
            policy_kind = PolicyKind::Proposed;
        } else if (const auto* s = std::get_if<StaticTddPolicy>(&p)) {
            policy_kind = PolicyKind::Static;
            static_alpha = s->alpha;
            static_bias = s->bias;
            static_ratio = s->fixed_ratio;
        } else if (const auto* d = std::get_if<DynamicTddPolicy>(&p)) {
            policy_kind = PolicyKind::Dynamic;
            cli_free = d->cli_free;
        }
    }

    ProcessingDelays processing() const { return {prep_symbols, pdsch_decode_symbols, pusch_decode_symbols}; }
    Numerology numerology() const { return {scs_hz}; }
    int slots_per_frame() const { return numerology().slots_per_frame(); }
    int frames_per_update() const { return static_cast<int>(std::lround(rfc_update_period_ms / kFrameMs)); }

    /// Per-UE arrival rates (packets/s) for UEs dropped in `cell`.
    std::pair<double, double> arrival_rates(int cell) const
    {
        const double total_mbps = offered_load_mbps ? *offered_load_mbps : offered_mbps(Direction::Dl) + offered_mbps(Direction::Ul);
        double share = offered_load_mbps ? dl_share
                                         : offered_mbps(Direction::Dl) / std::max(1e-300, total_mbps);
        if (!cell_load_ratios.empty()) {
            share = cell_load_ratios[static_cast<std::size_t>(cell) % cell_load_ratios.size()].dl_fraction();
        } else if (!offered_load_mbps) {
            return {arrival_rate_dl, arrival_rate_ul};
        }
        const double dl = ue_per_cell_dl > 0 ? total_mbps * 1e6 * share / (ue_per_cell_dl * payload_dl_bits) : 0.0;
        const double ul = ue_per_cell_ul > 0 ? total_mbps * 1e6 * (1.0 - share) / (ue_per_cell_ul * payload_ul_bits) : 0.0;
        return {dl, ul};
    }

    /// Offered load per cell in Mbps for one direction, from the base rates.
    double offered_mbps(Direction d) const
    {
        return d == Direction::Dl ? ue_per_cell_dl * payload_dl_bits * arrival_rate_dl / 1e6
                                  : ue_per_cell_ul * payload_ul_bits * arrival_rate_ul / 1e6;
    }

    /// Long-run DL share of the cluster's offered load.
    double offered_dl_fraction() const
    {
        double dl = 0.0, total = 0.0;
        for (int c = 0; c < cell_count; ++c) {
            const auto [ldl, lul] = arrival_rates(c);
            dl += ue_per_cell_dl * payload_dl_bits * ldl;
            total += ue_per_cell_dl * payload_dl_bits * ldl + ue_per_cell_ul * payload_ul_bits * lul;
        }
        return total > 0.0 ? dl / total : 0.5;
    }
};

// Key/value schema ----------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text)
{
    T v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ScenarioError(ScenarioError::Kind::Parse, std::string(key), "cannot parse '" + std::string(text) + "'");
    }
    return v;
}

inline bool parse_bool(std::string_view key, std::string_view text)
{
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ScenarioError(ScenarioError::Kind::Parse, std::string(key), "expected a boolean, got '" + std::string(text) + "'");
}

inline std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::vector<RatioLabel> parse_ratios(std::string_view key, std::string_view text)
{
    std::vector<RatioLabel> out;
    if (text.empty() || text == "none") return out;
    for (auto item : split(text, ',')) {
        try {
            out.push_back(RatioLabel::parse(item));
        } catch (const std::invalid_argument& e) {
            throw ScenarioError(ScenarioError::Kind::Parse, std::string(key), e.what());
        }
    }
    return out;
}

inline std::string format_ratios(const std::vector<RatioLabel>& rs)
{
    if (rs.empty()) return "none";
    std::string s;
    for (std::size_t i = 0; i < rs.size(); ++i) s += (i ? "," : "") + rs[i].str();
    return s;
}

struct FieldSpec {
    std::string_view key;
    std::function<void(Scenario&, std::string_view key, std::string_view value)> set;
    std::function<std::string(const Scenario&)> get;
};

template <typename T>
FieldSpec number_field(std::string_view key, T Scenario::*member)
{
    return {key,
            [member](Scenario& s, std::string_view k, std::string_view v) { s.*member = parse_number<T>(k, v); },
            [member](const Scenario& s) {
                if constexpr (std::is_floating_point_v<T>) {
                    return format_double(s.*member);
                } else {
                    return std::to_string(s.*member);
                }
            }};
}

inline FieldSpec bool_field(std::string_view key, bool Scenario::*member)
{
    return {key, [member](Scenario& s, std::string_view k, std::string_view v) { s.*member = parse_bool(k, v); },
            [member](const Scenario& s) { return std::string(s.*member ? "true" : "false"); }};
}

inline const std::vector<FieldSpec>& fields()
{
    static const std::vector<FieldSpec> table = {
        number_field("cell_count", &Scenario::cell_count),
        number_field("inter_site_distance_m", &Scenario::inter_site_distance_m),
        number_field("sectors_per_site", &Scenario::sectors_per_site),
        number_field("ue_per_cell_dl", &Scenario::ue_per_cell_dl),
        number_field("ue_per_cell_ul", &Scenario::ue_per_cell_ul),
        number_field("tx_antennas", &Scenario::tx_antennas),
        number_field("rx_antennas", &Scenario::rx_antennas),
        number_field("bandwidth_hz", &Scenario::bandwidth_hz),
        number_field("scs_hz", &Scenario::scs_hz),
        number_field("carrier_freq_hz", &Scenario::carrier_freq_hz),
        number_field("prb_count", &Scenario::prb_count),
        number_field("prb_per_subband", &Scenario::prb_per_subband),
        number_field("data_re_per_prb", &Scenario::data_re_per_prb),
        number_field("payload_dl_bits", &Scenario::payload_dl_bits),
        number_field("payload_ul_bits", &Scenario::payload_ul_bits),
        number_field("arrival_rate_dl", &Scenario::arrival_rate_dl),
        number_field("arrival_rate_ul", &Scenario::arrival_rate_ul),
        {"offered_load_mbps",
         [](Scenario& s, std::string_view k, std::string_view v) {
             if (v == "none") {
                 s.offered_load_mbps.reset();
             } else {
                 s.offered_load_mbps = parse_number<double>(k, v);
             }
         },
         [](const Scenario& s) { return s.offered_load_mbps ? format_double(*s.offered_load_mbps) : std::string("none"); }},
        number_field("dl_share", &Scenario::dl_share),
        {"cell_load_ratios",
         [](Scenario& s, std::string_view k, std::string_view v) { s.cell_load_ratios = parse_ratios(k, v); },
         [](const Scenario& s) { return format_ratios(s.cell_load_ratios); }},
        {"tdd_policy",
         [](Scenario& s, std::string_view k, std::string_view v) {
             if (v == "proposed") {
                 s.policy_kind = PolicyKind::Proposed;
             } else if (v == "static" || v == "stdd") {
                 s.policy_kind = PolicyKind::Static;
             } else if (v == "dynamic" || v == "dtdd") {
                 s.policy_kind = PolicyKind::Dynamic;
             } else {
                 throw ScenarioError(ScenarioError::Kind::Parse, std::string(k),
                                     "expected proposed|static|dynamic, got '" + std::string(v) + "'");
             }
         },
         [](const Scenario& s) {
             switch (s.policy_kind) {
             case PolicyKind::Static: return std::string("static");
             case PolicyKind::Dynamic: return std::string("dynamic");
             default: return std::string("proposed");
             }
         }},
        number_field("static_alpha", &Scenario::static_alpha),
        {"static_bias",
         [](Scenario& s, std::string_view k, std::string_view v) {
             if (v == "dl") {
                 s.static_bias = Direction::Dl;
             } else if (v == "ul") {
                 s.static_bias = Direction::Ul;
             } else {
                 throw ScenarioError(ScenarioError::Kind::Parse, std::string(k), "expected dl|ul");
             }
         },
         [](const Scenario& s) { return std::string(s.static_bias == Direction::Dl ? "dl" : "ul"); }},
        {"static_ratio",
         [](Scenario& s, std::string_view k, std::string_view v) {
             if (v == "auto") {
                 s.static_ratio.reset();
                 return;
             }
             auto r = parse_ratios(k, v);
             if (r.size() != 1) throw ScenarioError(ScenarioError::Kind::Parse, std::string(k), "expected one d:u ratio or auto");
             s.static_ratio = r.front();
         },
         [](const Scenario& s) { return s.static_ratio ? s.static_ratio->str() : std::string("auto"); }},
        bool_field("cli_free", &Scenario::cli_free),
        number_field("beta_hat", &Scenario::beta_hat),
        number_field("beta_max", &Scenario::beta_max),
        bool_field("kaiser_mirrored", &Scenario::kaiser_mirrored),
        bool_field("balance_from_mean", &Scenario::balance_from_mean),
        {"rfc_set", [](Scenario& s, std::string_view k, std::string_view v) { s.rfc_set = parse_ratios(k, v); },
         [](const Scenario& s) { return format_ratios(s.rfc_set); }},
        number_field("rfc_update_period_ms", &Scenario::rfc_update_period_ms),
        number_field("xn_delay_ms", &Scenario::xn_delay_ms),
        number_field("ul_report_delay_ms", &Scenario::ul_report_delay_ms),
        number_field("sim_duration_ms", &Scenario::sim_duration_ms),
        number_field("warmup_ms", &Scenario::warmup_ms),
        number_field("drain_ms", &Scenario::drain_ms),
        number_field("seed", &Scenario::seed),
        {"quantile_targets",
         [](Scenario& s, std::string_view k, std::string_view v) {
             s.quantile_targets.clear();
             for (auto item : split(v, ',')) s.quantile_targets.push_back(parse_number<double>(k, item));
         },
         [](const Scenario& s) {
             std::string out;
             for (std::size_t i = 0; i < s.quantile_targets.size(); ++i) {
                 out += (i ? "," : "") + format_double(s.quantile_targets[i]);
             }
             return out;
         }},
        number_field("prep_symbols", &Scenario::prep_symbols),
        number_field("pdsch_decode_symbols", &Scenario::pdsch_decode_symbols),
        number_field("pusch_decode_symbols", &Scenario::pusch_decode_symbols),
        number_field("harq_max_attempts", &Scenario::harq_max_attempts),
        number_field("bs_power_dbm", &Scenario::bs_power_dbm),
        number_field("ue_power_dbm", &Scenario::ue_power_dbm),
        number_field("noise_psd_dbm_hz", &Scenario::noise_psd_dbm_hz),
        number_field("noise_figure_db", &Scenario::noise_figure_db),
        bool_field("pure_sir", &Scenario::pure_sir),
        number_field("pathloss_exponent", &Scenario::pathloss_exponent),
        number_field("pathloss_ref_m", &Scenario::pathloss_ref_m),
        number_field("bs_bs_pathloss_exponent", &Scenario::bs_bs_pathloss_exponent),
        number_field("ue_ue_pathloss_exponent", &Scenario::ue_ue_pathloss_exponent),
        number_field("shadowing_sigma_db", &Scenario::shadowing_sigma_db),
        number_field("bler_target", &Scenario::bler_target),
        number_field("olla_step_db", &Scenario::olla_step_db),
        number_field("decode_margin_sigma_db", &Scenario::decode_margin_sigma_db),
        number_field("eesm_beta", &Scenario::eesm_beta),
        number_field("pf_window_tti", &Scenario::pf_window_tti),
        bool_field("trace_coordination", &Scenario::trace_coordination),
        bool_field("trace_sinr", &Scenario::trace_sinr),
    };
    return table;
}

inline void require(bool ok, std::string_view field, const std::string& message)
{
    if (!ok) throw ScenarioError(ScenarioError::Kind::Validation, std::string(field), message);
}

} // namespace detail

/// Applies one `key=value` override. Unknown keys are parse errors.
inline void set_field(Scenario& s, std::string_view key, std::string_view value)
{
    key = detail::trim(key);
    value = detail::trim(value);
    for (const auto& f : detail::fields()) {
        if (f.key == key) {
            f.set(s, key, value);
            return;
        }
    }
    throw ScenarioError(ScenarioError::Kind::Parse, std::string(key), "unknown key");
}

/// Applies an override written as "key=value".
inline void apply_override(Scenario& s, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ScenarioError(ScenarioError::Kind::Parse, "", "override must be key=value: '" + std::string(assignment) + "'");
    }
    set_field(s, assignment.substr(0, eq), assignment.substr(eq + 1));
}

inline std::vector<std::string> scenario_keys()
{
    std::vector<std::string> out;
    for (const auto& f : detail::fields()) out.emplace_back(f.key);
    return out;
}

inline std::string get_field(const Scenario& s, std::string_view key)
{
    for (const auto& f : detail::fields()) {
        if (f.key == key) return f.get(s);
    }
    throw ScenarioError(ScenarioError::Kind::Parse, std::string(key), "unknown key");
}

/// Throws ScenarioError(Validation) naming the first offending field.
inline void validate(const Scenario& s)
{
    using detail::require;
    require(s.cell_count >= 1, "cell_count", "must be >= 1");
    require(s.inter_site_distance_m > 0, "inter_site_distance_m", "must be > 0");
    require(s.sectors_per_site == 1 || s.sectors_per_site == 3, "sectors_per_site", "must be 1 or 3");
    require(s.ue_per_cell_dl >= 0, "ue_per_cell_dl", "must be >= 0");
    require(s.ue_per_cell_ul >= 0, "ue_per_cell_ul", "must be >= 0");
    require(s.tx_antennas >= 1 && s.tx_antennas <= 8, "tx_antennas", "must be in [1,8]");
    require(s.rx_antennas >= 1 && s.rx_antennas <= 8, "rx_antennas", "must be in [1,8]");
    const double slots_per_frame = kFrameMs * s.scs_hz / 15e3;
    require(s.scs_hz > 0 && slots_per_frame >= 1 && std::abs(slots_per_frame - std::round(slots_per_frame)) < 1e-9,
            "scs_hz", "must give a whole number of slots per 10 ms frame");
    require(s.bandwidth_hz > 0, "bandwidth_hz", "must be > 0");
    require(s.carrier_freq_hz > 0, "carrier_freq_hz", "must be > 0");
    require(s.prb_count >= 1, "prb_count", "must be >= 1");
    require(s.prb_count * 12.0 * s.scs_hz <= s.bandwidth_hz, "prb_count", "PRBs exceed the channel bandwidth");
    require(s.prb_per_subband >= 1, "prb_per_subband", "must be >= 1");
    require(s.data_re_per_prb >= 1 && s.data_re_per_prb <= 12 * kTtiSymbols, "data_re_per_prb", "must be in [1,48]");
    require(s.payload_dl_bits > 0, "payload_dl_bits", "must be > 0");
    require(s.payload_ul_bits > 0, "payload_ul_bits", "must be > 0");
    require(s.arrival_rate_dl >= 0, "arrival_rate_dl", "must be >= 0");
    require(s.arrival_rate_ul >= 0, "arrival_rate_ul", "must be >= 0");
    require(!s.offered_load_mbps || *s.offered_load_mbps >= 0, "offered_load_mbps", "must be >= 0");
    require(s.dl_share >= 0 && s.dl_share <= 1, "dl_share", "must lie in [0,1]");
    require(s.static_alpha >= 0 && s.static_alpha <= 1, "static_alpha", "must lie in [0,1]");
    require(s.beta_hat >= 0 && s.beta_hat <= 1, "beta_hat", "must lie in [0,1]");
    require(s.beta_max >= 0 && s.beta_max <= 700, "beta_max", "must lie in [0,700]");
    require(!s.rfc_set.empty(), "rfc_set", "must not be empty");
    try {
        RfcSet set(s.rfc_set, s.slots_per_frame());
        if (s.static_ratio) set.find(*s.static_ratio);
    } catch (const std::exception& e) {
        throw ScenarioError(ScenarioError::Kind::Validation, "rfc_set", e.what());
    }
    require(s.rfc_update_period_ms >= kFrameMs &&
                std::abs(s.rfc_update_period_ms / kFrameMs - std::round(s.rfc_update_period_ms / kFrameMs)) < 1e-9,
            "rfc_update_period_ms", "must be a positive multiple of the 10 ms frame");
    require(s.xn_delay_ms >= 0, "xn_delay_ms", "must be >= 0");
    require(s.ul_report_delay_ms >= 0, "ul_report_delay_ms", "must be >= 0");
    require(s.sim_duration_ms > 0, "sim_duration_ms", "must be > 0");
    require(s.warmup_ms >= 0 && s.warmup_ms < s.sim_duration_ms, "warmup_ms", "must lie in [0, sim_duration_ms)");
    require(s.drain_ms >= 0, "drain_ms", "must be >= 0");
    for (double q : s.quantile_targets) require(q > 0 && q < 1, "quantile_targets", "targets must lie in (0,1)");
    require(s.prep_symbols >= 0, "prep_symbols", "must be >= 0");
    require(s.pdsch_decode_symbols >= 0, "pdsch_decode_symbols", "must be >= 0");
    require(s.pusch_decode_symbols >= 0, "pusch_decode_symbols", "must be >= 0");
    require(s.harq_max_attempts >= 1, "harq_max_attempts", "must be >= 1");
    require(s.pathloss_exponent > 0, "pathloss_exponent", "must be > 0");
    require(s.pathloss_ref_m > 0, "pathloss_ref_m", "must be > 0");
    require(s.bs_bs_pathloss_exponent > 0, "bs_bs_pathloss_exponent", "must be > 0");
    require(s.ue_ue_pathloss_exponent > 0, "ue_ue_pathloss_exponent", "must be > 0");
    require(s.shadowing_sigma_db >= 0, "shadowing_sigma_db", "must be >= 0");
    require(s.bler_target > 0 && s.bler_target < 1, "bler_target", "must lie in (0,1)");
    require(s.olla_step_db >= 0, "olla_step_db", "must be >= 0");
    require(s.decode_margin_sigma_db >= 0, "decode_margin_sigma_db", "must be >= 0");
    require(s.eesm_beta > 0, "eesm_beta", "must be > 0");
    require(s.pf_window_tti >= 1, "pf_window_tti", "must be >= 1");
}

/// Parses a flat key/value document (`key = value`, `#` comments) on top of
/// the defaults, applies `overrides` in order, and validates the result.
inline Scenario load_scenario(std::string_view text, const std::vector<std::string>& overrides = {})
{
    Scenario s;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ScenarioError(ScenarioError::Kind::Parse, "", "line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = detail::trim(line.substr(0, eq));
        if (key.empty()) {
            throw ScenarioError(ScenarioError::Kind::Parse, "", "line " + std::to_string(line_no) + ": empty key");
        }
        set_field(s, key, line.substr(eq + 1));
    }
    for (const auto& o : overrides) apply_override(s, o);
    validate(s);
    return s;
}

/// Resolved configuration, one `key = value` per line, readable by load_scenario.
inline std::string to_text(const Scenario& s)
{
    std::string out;
    for (const auto& f : detail::fields()) {
        out += std::string(f.key) + " = " + f.get(s) + "\n";
    }
    return out;
}

} // namespace tddsim

#endif // TDDSIM_SCENARIO_HPP
