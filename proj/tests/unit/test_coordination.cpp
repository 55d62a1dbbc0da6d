#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tddsim/coordination.hpp"
#include "tddsim/random.hpp"
#include "tddsim/testing/oracles.hpp"

using namespace tddsim;

namespace {

const RfcSet& default_set()
{
    static const RfcSet set(RfcSet::default_labels(), 20);
    return set;
}

std::string label_of(int i) { return default_set()[i].label.str(); }

} // namespace

TEST(TrafficRatio, Examples)
{
    EXPECT_EQ(traffic_ratio(900, 100).value(), 0.9);
    EXPECT_EQ(traffic_ratio(500, 500).value(), 0.5);
    EXPECT_FALSE(traffic_ratio(0, 0).has_value());
    EXPECT_EQ(traffic_ratio(0, 10).value(), 0.0);
    EXPECT_EQ(traffic_ratio(10, 0).value(), 1.0);
    EXPECT_THROW(traffic_ratio(-1, 2), std::invalid_argument);
}

TEST(FrameAverage, MeanOfPresentSamples)
{
    std::vector<TrafficRatio> same(20, 0.7);
    EXPECT_DOUBLE_EQ(frame_average(same).value(), 0.7);
    std::vector<TrafficRatio> four = {0.2, 0.4, 0.6, 0.8};
    EXPECT_DOUBLE_EQ(frame_average(four).value(), 0.5);
    std::vector<TrafficRatio> gaps = {0.2, std::nullopt, 0.8, std::nullopt};
    EXPECT_DOUBLE_EQ(frame_average(gaps).value(), 0.5);
    std::vector<TrafficRatio> idle(20);
    EXPECT_FALSE(frame_average(idle).has_value());
}

TEST(Bessel, MatchesPlainSeries)
{
    for (double x : {0.0, 0.5, 1.0, 5.0, 12.0, 24.9, 25.0, 25.1, 40.0, 70.0, 90.0, 100.0}) {
        const double want = static_cast<double>(oracle::bessel_i0(x));
        EXPECT_NEAR(bessel_i0(x) / want, 1.0, 1e-13) << x;
    }
    // Frozen values.
    EXPECT_NEAR(bessel_i0(1.0), 1.2660658777520083, 1e-15);
    EXPECT_NEAR(bessel_i0(30.0) / 781672297823.97749, 1.0, 1e-13);
    EXPECT_NEAR(bessel_i0(100.0) / 1.0737517071310738e42, 1.0, 1e-13);
}

TEST(KaiserWindow, FlatAtZeroBeta)
{
    for (int L : {0, 1, 5, 20, 100}) {
        for (double w : kaiser_weights(L, 0.0)) EXPECT_EQ(w, 1.0);
    }
}

TEST(KaiserWindow, SelectiveValueAtThreeTenths)
{
    const auto w = kaiser_weights(10, 90.0);
    EXPECT_NEAR(w[3], 0.016214873132989802, 1e-13);
    EXPECT_NEAR(w[3], oracle::kaiser_weight(3, 10, 90.0), 1e-13);
}

TEST(KaiserWindow, PeakAtZeroAndStrictlyDecreasing)
{
    for (double beta : {0.5, 20.0, 90.0, 100.0}) {
        for (int L : {1, 2, 20, 100}) {
            const auto w = kaiser_weights(L, beta);
            EXPECT_EQ(w[0], 1.0);
            for (int l = 1; l <= L; ++l) {
                EXPECT_LT(w[l], w[l - 1]) << beta << ' ' << L << ' ' << l;
                EXPECT_GT(w[l], 0.0);
                EXPECT_NEAR(w[l], oracle::kaiser_weight(l, L, beta), 1e-12 * std::max(1.0, w[l]) + 1e-300);
            }
        }
    }
    EXPECT_EQ(kaiser_weights(0, 90.0), std::vector<double>{1.0});
    EXPECT_THROW(kaiser_weights(-1, 1.0), std::invalid_argument);
    EXPECT_THROW(kaiser_weights(3, -1.0), std::invalid_argument);
}

TEST(KaiserWindow, SymmetricShapePeaksInTheMiddle)
{
    const auto w = kaiser_weights(20, 10.0, WindowShape::Symmetric);
    EXPECT_EQ(w[10], 1.0);
    EXPECT_NEAR(w[0], w[20], 1e-15);
    EXPECT_NEAR(w[0], 1.0 / bessel_i0(10.0), 1e-15);
}

TEST(SortReports, DistanceOrderWithIdTieBreak)
{
    const std::vector<TrafficRatio> mu = {0.5, 0.9, 0.1, 0.6};
    const auto r = sort_reports(mu);
    ASSERT_EQ(r.size(), 4u);
    EXPECT_EQ(r[0].cell, 1);
    EXPECT_EQ(r[1].cell, 2);
    EXPECT_EQ(r[2].cell, 3);
    EXPECT_EQ(r[3].cell, 0);
    EXPECT_NEAR(r[0].distance, 0.4, 1e-15);
    EXPECT_NEAR(r[1].distance, 0.4, 1e-15);
    EXPECT_NEAR(r[2].distance, 0.1, 1e-15);
    EXPECT_EQ(r[3].distance, 0.0);
}

TEST(SortReports, EqualAndSingleAndIdle)
{
    const std::vector<TrafficRatio> equal(5, 0.5);
    const auto r = sort_reports(equal);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(r[i].cell, i);
    const std::vector<TrafficRatio> one = {0.3};
    EXPECT_EQ(sort_reports(one).front().cell, 0);
    const std::vector<TrafficRatio> idle = {std::nullopt, 0.7, std::nullopt};
    const auto s = sort_reports(idle);
    EXPECT_EQ(s[0].cell, 1);
    EXPECT_EQ(s[1].ratio, 0.5);
    EXPECT_EQ(s[2].distance, 0.0);
}

TEST(FilterTheta, Examples)
{
    const std::vector<double> psi = {0.1, 0.2, 0.3};
    EXPECT_NEAR(filter_theta(psi, kaiser_weights(2, 0.0)), 0.2, 1e-15);
    EXPECT_THROW(filter_theta(psi, kaiser_weights(3, 0.0)), std::invalid_argument);
    EXPECT_THROW(filter_theta(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);

    std::vector<double> dominated(21, 0.5);
    dominated[0] = 0.9;
    const double theta = filter_theta(dominated, kaiser_weights(20, 90.0));
    EXPECT_GT(theta, 0.5);
    EXPECT_NEAR(theta, 0.62744818406018218, 1e-12);
}

TEST(FilterTheta, ConvexCombination)
{
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        const int n = 1 + k % 21;
        std::vector<double> psi(n);
        for (auto& x : psi) x = u(rng);
        const double theta = filter_theta(psi, kaiser_weights(n - 1, 100.0 * u(rng)));
        EXPECT_GE(theta, *std::min_element(psi.begin(), psi.end()) - 1e-15);
        EXPECT_LE(theta, *std::max_element(psi.begin(), psi.end()) + 1e-15);
    }
}

TEST(ClusterFilter, MatchesOracleOnRandomClusters)
{
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 300; ++k) {
        const int C = k % 2 ? 21 : 3;
        std::vector<oracle::CellFrame> z(C);
        std::vector<TrafficRatio> mu(C);
        for (int c = 0; c < C; ++c) {
            std::vector<TrafficRatio> s;
            for (int slot = 0; slot < 20; ++slot) {
                const double dl = u(rng) < 0.3 ? 0.0 : std::floor(4000 * u(rng));
                const double ul = u(rng) < 0.3 ? 0.0 : std::floor(4000 * u(rng));
                z[c].push_back({dl, ul});
                s.push_back(traffic_ratio(dl, ul));
            }
            mu[c] = frame_average(s);
        }
        const ClusterFilterConfig cfg{u(rng), 100.0, WindowShape::Mirrored, false};
        const auto got = filter_cluster(mu, cfg);
        const auto want = oracle::cluster_theta(z, cfg.beta());
        ASSERT_EQ(got.theta.has_value(), want.has_value());
        if (want) EXPECT_NEAR(*got.theta / *want, 1.0, 1e-10);
    }
}

TEST(ClusterFilter, ScaleInvariance)
{
    Rng rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double scale = std::exp2(std::floor(20 * u(rng)) - 10); // exact in binary
        std::vector<TrafficRatio> a(21), b(21);
        for (int c = 0; c < 21; ++c) {
            std::vector<TrafficRatio> sa, sb;
            for (int slot = 0; slot < 20; ++slot) {
                const double dl = std::floor(1000 * u(rng)), ul = std::floor(1000 * u(rng));
                sa.push_back(traffic_ratio(dl, ul));
                sb.push_back(traffic_ratio(dl * scale, ul * scale));
            }
            a[c] = frame_average(sa);
            b[c] = frame_average(sb);
        }
        const ClusterFilterConfig cfg{0.9, 100.0, WindowShape::Mirrored, false};
        const auto ta = filter_cluster(a, cfg).theta, tb = filter_cluster(b, cfg).theta;
        ASSERT_TRUE(ta && tb);
        EXPECT_EQ(*ta, *tb);
        EXPECT_EQ(quantize_theta(*ta, default_set()), quantize_theta(*tb, default_set()));
    }
}

TEST(ClusterFilter, WindowFollowsSortedOrder)
{
    // Swapping which cell is extreme and which is mild must not matter to the
    // sorted pipeline, but weighting the raw (unsorted) order would differ.
    const std::vector<TrafficRatio> a = {0.95, 0.55, 0.5, 0.5};
    const std::vector<TrafficRatio> b = {0.55, 0.95, 0.5, 0.5};
    const ClusterFilterConfig sharp{0.9, 100.0, WindowShape::Mirrored, false};
    EXPECT_EQ(filter_cluster(a, sharp).theta, filter_cluster(b, sharp).theta);

    const std::vector<double> raw_a = {0.95, 0.55, 0.5, 0.5};
    const std::vector<double> raw_b = {0.55, 0.95, 0.5, 0.5};
    const auto w = kaiser_weights(3, 90.0);
    EXPECT_NE(filter_theta(raw_a, w), filter_theta(raw_b, w));
    const auto flat = kaiser_weights(3, 0.0);
    EXPECT_EQ(filter_theta(raw_a, flat), filter_theta(raw_b, flat));
}

TEST(ClusterFilter, AllIdleHasNoTheta)
{
    const std::vector<TrafficRatio> idle(21);
    EXPECT_FALSE(filter_cluster(idle, {}).theta.has_value());
}

TEST(ClusterFilter, BalanceFromMeanFlag)
{
    const std::vector<TrafficRatio> mu = {0.8, 0.8, 0.8, 0.2};
    ClusterFilterConfig cfg{0.9, 100.0, WindowShape::Mirrored, true};
    const auto r = filter_cluster(mu, cfg);
    EXPECT_NEAR(r.balance, 0.65, 1e-15);
    EXPECT_EQ(r.ordered.front().cell, 3);
}

TEST(Controller, ProposedCommonFrame)
{
    const RfcController ctl(ProposedPolicy{}, {0.9, 100.0, WindowShape::Mirrored, false}, default_set(), 0.5);
    for (double bh : {0.0, 0.2, 0.5, 0.9}) {
        const RfcController c(ProposedPolicy{}, {bh, 100.0, WindowShape::Mirrored, false}, default_set(), 0.5);
        const auto d = c.decide(std::vector<TrafficRatio>(21, 0.2));
        for (int r : d.rfc_per_cell) EXPECT_EQ(label_of(r), "1:4");
    }
    const std::vector<TrafficRatio> mixed = {0.1, 0.9, 0.4, 0.6, std::nullopt};
    const auto d = ctl.decide(mixed);
    EXPECT_TRUE(std::all_of(d.rfc_per_cell.begin(), d.rfc_per_cell.end(), [&](int x) { return x == d.rfc_per_cell[0]; }));
    const auto idle = ctl.decide(std::vector<TrafficRatio>(4));
    for (int r : idle.rfc_per_cell) EXPECT_EQ(label_of(r), "1:1");
    EXPECT_FALSE(idle.theta.has_value());
}

TEST(Controller, StaticNeverChanges)
{
    const RfcController matched(StaticTddPolicy{0.0, Direction::Dl, std::nullopt}, {}, default_set(), 0.5);
    for (int r : matched.initial(3)) EXPECT_EQ(label_of(r), "1:1");
    for (int r : matched.decide(std::vector<TrafficRatio>(3, 0.05)).rfc_per_cell) EXPECT_EQ(label_of(r), "1:1");

    // 0.5 + 0.175 = 0.675 is nearest 2:1.
    const RfcController shifted(StaticTddPolicy{0.35, Direction::Dl, std::nullopt}, {}, default_set(), 0.5);
    EXPECT_EQ(label_of(shifted.initial(1)[0]), "2:1");
    const RfcController toward_ul(StaticTddPolicy{0.35, Direction::Ul, std::nullopt}, {}, default_set(), 0.5);
    EXPECT_EQ(label_of(toward_ul.initial(1)[0]), "1:2");
    const RfcController fixed(StaticTddPolicy{0.0, Direction::Dl, RatioLabel{1, 1}}, {}, default_set(), 0.75);
    EXPECT_EQ(label_of(fixed.initial(1)[0]), "1:1");
    const RfcController skewed(StaticTddPolicy{0.0, Direction::Dl, std::nullopt}, {}, default_set(), 0.75);
    EXPECT_EQ(label_of(skewed.initial(1)[0]), "3:1");
}

TEST(Controller, DynamicPerCell)
{
    const RfcController ctl(DynamicTddPolicy{false}, {}, default_set(), 0.5);
    const std::vector<TrafficRatio> mu = {0.8, 0.25, std::nullopt};
    const auto d = ctl.decide(mu);
    EXPECT_EQ(label_of(d.rfc_per_cell[0]), "4:1");
    EXPECT_EQ(label_of(d.rfc_per_cell[1]), "1:3");
    EXPECT_EQ(label_of(d.rfc_per_cell[2]), "1:1");
}

TEST(Xn, DelayedDelivery)
{
    XnExchange xn(2, 1.5);
    EXPECT_FALSE(xn.any_received());
    xn.send(0, 0.7, 0, 10.0);
    xn.send(1, std::nullopt, 0, 10.0);
    auto early = xn.collect(11.0);
    EXPECT_FALSE(early[0].has_value());
    auto on_time = xn.collect(11.5);
    EXPECT_EQ(on_time[0].value(), 0.7);
    EXPECT_FALSE(on_time[1].has_value());
    EXPECT_TRUE(xn.any_received());

    // Newest delivered report wins; an undelivered newer one does not.
    xn.send(0, 0.2, 1, 20.0);
    EXPECT_EQ(xn.collect(20.0)[0].value(), 0.7);
    EXPECT_EQ(xn.collect(21.5)[0].value(), 0.2);
}

TEST(Xn, ZeroDelayUsesOnlyThisRound)
{
    XnExchange xn(1, 0.0);
    xn.send(0, 0.3, 0, 10.0);
    EXPECT_EQ(xn.collect(10.0)[0].value(), 0.3);
    xn.send(0, 0.6, 1, 20.0);
    EXPECT_EQ(xn.collect(20.0)[0].value(), 0.6);
}
