#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "tddsim/random.hpp"
#include "tddsim/scenario.hpp"
#include "tddsim/topology.hpp"
#include "tddsim/traffic.hpp"

using namespace tddsim;

TEST(Scenario, EmptyDocumentGivesDefaults)
{
    const auto s = load_scenario("");
    EXPECT_EQ(to_text(s), to_text(Scenario{}));
    EXPECT_EQ(s.cell_count, 21);
    EXPECT_EQ(s.tx_antennas, 8);
    EXPECT_EQ(s.rx_antennas, 2);
    EXPECT_EQ(s.ue_per_cell_dl, 10);
    EXPECT_EQ(s.ue_per_cell_ul, 10);
    EXPECT_EQ(s.payload_dl_bits, 400);
    EXPECT_EQ(s.bandwidth_hz, 10e6);
    EXPECT_EQ(s.scs_hz, 30e3);
    EXPECT_EQ(s.carrier_freq_hz, 3.5e9);
    EXPECT_EQ(s.rfc_update_period_ms, 10.0);
    EXPECT_EQ(s.prep_symbols, 3.0);
    EXPECT_EQ(s.pdsch_decode_symbols, 4.5);
    EXPECT_EQ(s.pusch_decode_symbols, 5.5);
    EXPECT_EQ(s.slots_per_frame(), 20);
}

TEST(Scenario, OverridesAndComments)
{
    const auto s = load_scenario("# comment\ncell_count = 7   # trailing\n\nseed=42\n");
    EXPECT_EQ(s.cell_count, 7);
    EXPECT_EQ(s.seed, 42u);
    EXPECT_EQ(s.ue_per_cell_dl, 10);
    const auto t = load_scenario("cell_count = 7", {"cell_count=3", "tdd_policy=static", "static_alpha=0.35"});
    EXPECT_EQ(t.cell_count, 3);
    EXPECT_EQ(policy_name(t.policy()), "stdd(alpha=0.35)");
}

TEST(Scenario, ValidationNamesTheField)
{
    try {
        load_scenario("beta_hat = 1.5");
        FAIL() << "expected a validation error";
    } catch (const ScenarioError& e) {
        EXPECT_EQ(e.kind(), ScenarioError::Kind::Validation);
        EXPECT_EQ(e.field(), "beta_hat");
    }
    EXPECT_THROW(load_scenario("cell_count = 0"), ScenarioError);
    EXPECT_THROW(load_scenario("quantile_targets = 0.9,1.0"), ScenarioError);
    EXPECT_THROW(load_scenario("static_ratio = 5:1"), ScenarioError);
}

TEST(Scenario, ParseErrors)
{
    auto kind = [](const std::string& text) {
        try {
            load_scenario(text);
        } catch (const ScenarioError& e) {
            return e.kind();
        }
        return ScenarioError::Kind::Validation; // unreachable in these cases
    };
    EXPECT_EQ(kind("no_such_key = 1"), ScenarioError::Kind::Parse);
    EXPECT_EQ(kind("cell_count = seven"), ScenarioError::Kind::Parse);
    EXPECT_EQ(kind("cell_count 7"), ScenarioError::Kind::Parse);
    EXPECT_EQ(kind("tdd_policy = adaptive"), ScenarioError::Kind::Parse);
    EXPECT_EQ(kind("cli_free = maybe"), ScenarioError::Kind::Parse);
    Scenario s;
    EXPECT_THROW(apply_override(s, "cell_count"), ScenarioError);
}

TEST(Scenario, ResolvedTextRoundTrips)
{
    const auto s = load_scenario("", {"cell_count=9", "tdd_policy=dynamic", "cli_free=true", "cell_load_ratios=3:1,1:3",
                                      "offered_load_mbps=2.5", "static_ratio=2:1", "quantile_targets=0.99,0.999"});
    const auto t = load_scenario(to_text(s));
    EXPECT_EQ(to_text(s), to_text(t));
    EXPECT_EQ(policy_name(t.policy()), "dtdd-cli-free");
    for (const auto& k : scenario_keys()) EXPECT_EQ(get_field(s, k), get_field(t, k)) << k;
}

TEST(Scenario, OfferedLoadArithmetic)
{
    const Scenario s;
    // 10 UEs x 400 bits x 125 /s = 0.5 Mbps each way.
    EXPECT_NEAR(s.offered_mbps(Direction::Dl), 0.5, 1e-12);
    EXPECT_NEAR(s.offered_mbps(Direction::Dl) + s.offered_mbps(Direction::Ul), 1.0, 1e-12);
    EXPECT_NEAR(s.offered_dl_fraction(), 0.5, 1e-12);

    auto t = load_scenario("", {"offered_load_mbps=3", "dl_share=0.75"});
    const auto [dl, ul] = t.arrival_rates(0);
    EXPECT_NEAR(dl, 562.5, 1e-9);
    EXPECT_NEAR(ul, 187.5, 1e-9);
    EXPECT_NEAR(t.offered_dl_fraction(), 0.75, 1e-12);

    auto h = load_scenario("", {"offered_load_mbps=3", "cell_load_ratios=3:1,1:3"});
    EXPECT_NEAR(h.arrival_rates(0).first, 562.5, 1e-9);
    EXPECT_NEAR(h.arrival_rates(1).first, 187.5, 1e-9);
    EXPECT_NEAR(h.arrival_rates(2).first, 562.5, 1e-9);
}

TEST(Topology, SingleCellSingleUe)
{
    auto s = load_scenario("", {"cell_count=1", "ue_per_cell_dl=1", "ue_per_cell_ul=0"});
    Rng rng(1);
    const auto t = build_topology(s, rng);
    ASSERT_EQ(t.cell_count(), 1);
    ASSERT_EQ(t.ue_count(), 1);
    EXPECT_EQ(t.ues[0].serving_cell, 0);
    EXPECT_EQ(t.served(0, Direction::Dl), std::vector<int>{0});
}

TEST(Topology, Deterministic)
{
    const Scenario s;
    Rng a = make_stream(5, Stream::Topology), b = make_stream(5, Stream::Topology);
    const auto ta = build_topology(s, a), tb = build_topology(s, b);
    ASSERT_EQ(ta.ue_count(), tb.ue_count());
    for (int u = 0; u < ta.ue_count(); ++u) {
        EXPECT_EQ(ta.ues[u].position.x, tb.ues[u].position.x);
        EXPECT_EQ(ta.ues[u].serving_cell, tb.ues[u].serving_cell);
    }
    for (int i = 0; i < ta.node_count(); ++i) {
        for (int j = 0; j < ta.node_count(); ++j) ASSERT_EQ(ta.gain_db(i, j), tb.gain_db(i, j));
    }
}

TEST(Topology, DefaultClusterAttachesToStrongest)
{
    const Scenario s;
    Rng rng = make_stream(1, Stream::Topology);
    const auto t = build_topology(s, rng);
    EXPECT_EQ(t.cell_count(), 21);
    EXPECT_EQ(t.sites.size(), 7u);
    EXPECT_EQ(t.ue_count(), 21 * 20);
    int served_total = 0;
    for (int c = 0; c < t.cell_count(); ++c) {
        served_total += t.served(c, Direction::Dl).size() + t.served(c, Direction::Ul).size();
    }
    EXPECT_EQ(served_total, t.ue_count());
    for (int u = 0; u < t.ue_count(); ++u) {
        const int serving = t.ues[u].serving_cell;
        for (int c = 0; c < t.cell_count(); ++c) {
            const double g = t.gain_db(c, t.ue_node(u));
            EXPECT_LE(g, t.gain_db(serving, t.ue_node(u)));
            if (g == t.gain_db(serving, t.ue_node(u))) EXPECT_GE(c, serving);
        }
    }
    for (int i = 0; i < t.node_count(); ++i) {
        for (int j = 0; j < t.node_count(); ++j) {
            if (i == j) continue;
            ASSERT_TRUE(std::isfinite(t.gain_db(i, j)));
            ASSERT_LT(t.gain_db(i, j), 0.0);
            ASSERT_EQ(t.gain_db(i, j), t.gain_db(j, i));
        }
    }
}

TEST(Topology, SitesOnHexGrid)
{
    const auto sites = detail::hex_sites(7, 500.0);
    for (int k = 1; k < 7; ++k) EXPECT_NEAR(distance(sites[0], sites[k]), 500.0, 1e-9);
    for (int a = 1; a < 7; ++a) {
        for (int b = a + 1; b < 7; ++b) EXPECT_GE(distance(sites[a], sites[b]), 500.0 - 1e-9);
    }
}

TEST(Topology, PathlossAtReferenceIsFreeSpace)
{
    // 20 log10(35) + 20 log10(3.5e9) - 147.55
    EXPECT_NEAR(detail::pathloss_db(35.0, 3.76, 35.0, 3.5e9), 74.2127, 1e-3);
    EXPECT_NEAR(detail::pathloss_db(350.0, 3.76, 35.0, 3.5e9) - detail::pathloss_db(35.0, 3.76, 35.0, 3.5e9), 37.6, 1e-9);
}

TEST(Arrivals, ZeroRateIsEmpty)
{
    Rng rng(1);
    EXPECT_TRUE(generate_arrivals(rng, 0.0, 1000.0).empty());
}

TEST(Arrivals, PoissonCountMean)
{
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng = make_stream(seed, Stream::Arrivals);
        const auto a = generate_arrivals(rng, 125.0, 10000.0);
        for (std::size_t i = 1; i < a.size(); ++i) ASSERT_GT(a[i], a[i - 1]);
        if (!a.empty()) ASSERT_LT(a.back(), 10000.0);
        sum += a.size();
    }
    // Mean of 1000 Poisson(1250) counts has sd sqrt(1250/1000).
    EXPECT_NEAR(sum / 1000.0, 1250.0, 3.0 * std::sqrt(1.25));
}

TEST(Traffic, BufferedSamples)
{
    TrafficState t(2);
    EXPECT_EQ(t.sample_buffered(0, 5.0), (BufferSample{0, 0}));

    Packet dl;
    dl.cell = 0;
    dl.direction = Direction::Dl;
    dl.size_bits = 400;
    dl.arrival_ms = 1.0;
    t.enqueue(dl);
    EXPECT_EQ(t.sample_buffered(0, 1.0), (BufferSample{400, 0}));
    EXPECT_EQ(t.sample_buffered(0, 0.5), (BufferSample{0, 0}));

    t.queue(0, Direction::Dl).front().remaining_bits = 200;
    Packet ul = dl;
    ul.direction = Direction::Ul;
    t.enqueue(ul);
    EXPECT_EQ(t.sample_buffered(0, 2.0), (BufferSample{200, 400}));
    EXPECT_EQ(t.sample_buffered(0, 2.0, 1.5), (BufferSample{200, 0}));
    EXPECT_EQ(t.sample_buffered(1, 2.0), (BufferSample{0, 0}));
    // Sampling does not mutate.
    EXPECT_EQ(t.sample_buffered(0, 2.0), (BufferSample{200, 400}));
}

TEST(Traffic, ConservationIdentity)
{
    TrafficState t(1);
    Rng rng(3);
    std::uniform_int_distribution<int> pick(0, 2);
    for (int i = 0; i < 300; ++i) {
        Packet p;
        p.direction = i % 2 ? Direction::Ul : Direction::Dl;
        p.size_bits = 400;
        t.enqueue(p);
    }
    for (Direction d : {Direction::Dl, Direction::Ul}) {
        for (auto& p : t.queue(0, d)) {
            const int k = pick(rng);
            if (k == 0) t.mark_completed(p, 1.0);
            if (k == 1) t.mark_dropped(p);
        }
        t.purge(0, d);
    }
    EXPECT_TRUE(t.conserved());
    const auto tot = t.totals();
    EXPECT_EQ(tot.generated, 300);
    EXPECT_EQ(tot.generated, tot.completed + tot.dropped + t.residual().first);
    EXPECT_EQ(tot.generated_bits, 300 * 400);
}

TEST(Seeds, StreamsDiffer)
{
    EXPECT_NE(derive_seed(1, {1, 0}), derive_seed(1, {1, 1}));
    EXPECT_NE(derive_seed(1, {1, 0}), derive_seed(1, {2, 0}));
    EXPECT_NE(derive_seed(1, {1, 0}), derive_seed(2, {1, 0}));
    EXPECT_EQ(derive_seed(9, {3, 4}), derive_seed(9, {3, 4}));
    Rng a = make_stream(1, Stream::Fading), b = make_stream(1, Stream::Decoding);
    EXPECT_NE(a(), b());
}
