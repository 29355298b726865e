#include <gtest/gtest.h>

#include <random>

#include "esta/errors.hpp"
#include "esta/spa.hpp"
#include "oracles.hpp"
#include "worked_example.hpp"

using namespace esta;

namespace {

Micros s(double v) { return Micros::from_seconds(v); }
const Micros kInf = Micros::unreachable();
constexpr std::uint32_t kNoHop = kUnreachableHops;
const TransmitParams kParams{s(0.1)};

const char* kCols[] = {"u1", "u2", "u3", "u4", "u5", "u6", "u7", "u8", "u9", "u10", "g0"};

// Earliest delivery times and hop counts from u1, u2, u3 with t_gen = 0.
const double kTable1[3][11] = {
    {0, 1.1, 6.2, 0.1, 0.1, 6.1, 7.2, 3.1, 5.1, 7.1, 4.1},
    {1.2, 0, 6.2, 1.3, 1.1, 6.1, 7.2, 3.1, 5.1, 7.1, 4.1},
    {-1, 6.2, 0, -1, 6.3, 6.1, 2.1, 6.4, 6.2, 5.1, 6.1},
};
const std::uint32_t kTable2[3][11] = {
    {0, 2, 4, 1, 1, 3, 5, 2, 2, 4, 3},
    {2, 0, 2, 3, 1, 1, 3, 4, 2, 2, 5},
    {kNoHop, 2, 0, kNoHop, 3, 1, 1, 4, 2, 2, 3},
};

}  // namespace

TEST(Forwardable, Examples) {
    EXPECT_TRUE(forwardable(s(0.1), {s(3), s(6)}, s(0.1)));
    EXPECT_TRUE(forwardable(s(6.4), {s(4), s(9)}, s(0.1)));
    EXPECT_FALSE(forwardable(s(5.95), {s(3), s(6)}, s(0.1)));
    EXPECT_TRUE(forwardable(s(5.9), {s(3), s(6)}, s(0.1)));
    EXPECT_EQ(hop_arrival(s(0.1), {s(3), s(6)}, s(0.1)), s(3.1));
    EXPECT_EQ(hop_arrival(s(5.95), {s(3), s(6)}, s(0.1)), std::nullopt);
}

TEST(TransmitParams, FromLink) {
    EXPECT_EQ(TransmitParams::from_link(10'000, 125'000).t_trans, s(0.08));
    EXPECT_THROW(TransmitParams::from_link(0, 1), InvalidArgument);
}

TEST(Spa, WorkedExampleDeliveryTimes) {
    auto tcg = worked_example();
    const NodeId g0 = tcg.id("g0");
    auto t1 = shortest_paths(tcg, tcg.id("u1"), s(0), kParams);
    EXPECT_EQ(t1.T(g0), s(4.1));
    EXPECT_EQ(t1.H(g0), 3u);
    std::vector<std::string> path;
    for (auto v : t1.path_to(g0)) path.push_back(tcg.name(v));
    EXPECT_EQ(path, (std::vector<std::string>{"u1", "u4", "u8", "g0"}));
    auto t3 = shortest_paths(tcg, tcg.id("u3"), s(0), kParams);
    EXPECT_EQ(t3.T(g0), s(6.1));
    EXPECT_EQ(t3.H(g0), 3u);
}

TEST(Spa, TablesOneAndTwoFullReconstruction) {
    auto tcg = worked_example();
    const char* rows[] = {"u1", "u2", "u3"};
    for (int r = 0; r < 3; ++r) {
        auto t = shortest_paths(tcg, tcg.id(rows[r]), s(0), kParams);
        for (int c = 0; c < 11; ++c) {
            const NodeId v = tcg.id(kCols[c]);
            const Micros want = kTable1[r][c] < 0 ? kInf : s(kTable1[r][c]);
            EXPECT_EQ(t.T(v), want) << rows[r] << "->" << kCols[c];
            EXPECT_EQ(t.H(v), kTable2[r][c]) << rows[r] << "->" << kCols[c];
        }
    }
}

TEST(Spa, TextEdgesReproduceQuotedRows) {
    auto tcg = worked_example_text_edges();
    const NodeId g0 = tcg.id("g0");
    auto t1 = shortest_paths(tcg, tcg.id("u1"), s(0), kParams);
    auto t2 = shortest_paths(tcg, tcg.id("u2"), s(0), kParams);
    auto t3 = shortest_paths(tcg, tcg.id("u3"), s(0), kParams);
    EXPECT_EQ(t1.T(g0), s(4.1));
    EXPECT_EQ(t1.H(g0), 3u);
    EXPECT_EQ(t2.T(g0), s(4.1));
    EXPECT_EQ(t2.H(g0), 5u);
    EXPECT_EQ(t3.T(g0), s(6.1));
    EXPECT_EQ(t3.H(g0), 3u);
    // Cells that only involve text-quoted windows.
    EXPECT_EQ(t1.T(tcg.id("u4")), s(0.1));
    EXPECT_EQ(t1.T(tcg.id("u8")), s(3.1));
    EXPECT_EQ(t2.T(tcg.id("u5")), s(1.1));
    EXPECT_EQ(t2.T(tcg.id("u1")), s(1.2));
    EXPECT_EQ(t2.T(tcg.id("u4")), s(1.3));
    EXPECT_EQ(t3.T(tcg.id("u7")), s(2.1));
    EXPECT_EQ(t3.T(tcg.id("u10")), s(5.1));
    EXPECT_FALSE(t3.reachable(tcg.id("u1")));
    EXPECT_FALSE(t3.reachable(tcg.id("u4")));
}

TEST(Spa, SourceLabels) {
    auto tcg = worked_example();
    auto t = shortest_paths(tcg, tcg.id("u7"), s(2.5), kParams);
    EXPECT_EQ(t.T(tcg.id("u7")), s(2.5));
    EXPECT_EQ(t.H(tcg.id("u7")), 0u);
    EXPECT_FALSE(t.prev[tcg.id("u7").value].has_value());
    EXPECT_THROW(shortest_paths(tcg, NodeId{99}, s(0), kParams), InvalidArgument);
}

TEST(Spa, GroundStationDoesNotRelay) {
    // a - g0 - b with g0 in the middle: b only reachable through g0.
    Tcg tcg({"a", "b", "g0"}, {{NodeId{0}, NodeId{2}, s(0), s(5)}, {NodeId{2}, NodeId{1}, s(0), s(5)}}, NodeId{2});
    auto t = shortest_paths(tcg, NodeId{0}, s(0), kParams);
    EXPECT_EQ(t.T(NodeId{2}), s(0.1));
    EXPECT_FALSE(t.reachable(NodeId{1}));
    auto from_g0 = shortest_paths(tcg, NodeId{2}, s(0), kParams);
    EXPECT_TRUE(from_g0.reachable(NodeId{1}));
}

TEST(Spa, EqualArrivalKeepsFirstSettledPredecessor) {
    // n3 is reached at 1.1 both via n1 and n2; n1 settles first.
    Tcg tcg({"n0", "n1", "n2", "n3"}, {{NodeId{0}, NodeId{1}, s(0), s(5)},
                                       {NodeId{0}, NodeId{2}, s(0), s(5)},
                                       {NodeId{1}, NodeId{3}, s(1), s(5)},
                                       {NodeId{2}, NodeId{3}, s(1), s(5)}});
    auto t = shortest_paths(tcg, NodeId{0}, s(0), kParams);
    EXPECT_EQ(t.T(NodeId{3}), s(1.1));
    EXPECT_EQ(t.prev[3], NodeId{1});
}

TEST(Spa, MatchesBruteForceOnRandomGraphs) {
    std::mt19937_64 rng(2024);
    std::size_t reachable = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = std::uniform_int_distribution<int>(2, 8)(rng);
        auto tcg = oracle::random_tcg(rng, n, 14);
        const auto src = static_cast<std::uint32_t>(std::uniform_int_distribution<int>(0, n - 1)(rng));
        const auto t_gen = s(std::uniform_int_distribution<int>(0, 100)(rng) / 10.0);
        auto table = shortest_paths(tcg, NodeId{src}, t_gen, kParams);
        auto want = oracle::brute_force_arrivals(tcg, src, t_gen.count(), kParams.t_trans.count());
        for (int v = 0; v < n; ++v) {
            const Micros got = table.T(NodeId{static_cast<std::uint32_t>(v)});
            if (want[v] == oracle::kNever) {
                EXPECT_TRUE(got.is_unreachable()) << "trial " << trial << " node " << v;
            } else {
                EXPECT_EQ(got.count(), want[v]) << "trial " << trial << " node " << v;
                ++reachable;
            }
        }
    }
    EXPECT_EQ(reachable, 570u);
}

TEST(Spa, PathReplayAndNoWaitBound) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        auto tcg = oracle::random_tcg(rng, 8, 14);
        auto table = shortest_paths(tcg, NodeId{0}, s(1), kParams);
        for (std::uint32_t v = 0; v < 8; ++v) {
            if (!table.reachable(NodeId{v})) {
                continue;
            }
            auto path = table.path_to(NodeId{v});
            ASSERT_EQ(path.size(), table.H(NodeId{v}) + 1);
            Micros t = s(1);
            for (std::size_t h = 0; h + 1 < path.size(); ++h) {
                auto hop = earliest_hop(tcg, path[h], path[h + 1], t, kParams.t_trans);
                ASSERT_TRUE(hop.has_value());
                t = hop->arrive;
                EXPECT_EQ(t, table.T(path[h + 1]));
            }
            EXPECT_EQ(t, table.T(NodeId{v}));
            EXPECT_GE(table.T(NodeId{v}), s(1) + kParams.t_trans * table.H(NodeId{v}));
        }
    }
}

TEST(UserQueryDelay, MaxOverTargets) {
    auto tcg = worked_example();
    const NodeId g0 = tcg.id("g0");
    std::vector<SpaTable> tables;
    for (auto name : {"u1", "u2", "u3"}) {
        tables.push_back(shortest_paths(tcg, tcg.id(name), s(0), kParams));
    }
    EXPECT_EQ(user_query_delay(tcg, tables, g0), s(6.1));
    EXPECT_EQ(user_query_delay(tcg, std::span(tables).first(1), g0), s(4.1));
    EXPECT_EQ(user_query_delay(tcg, {}, g0), s(0));
}

TEST(UserQueryDelay, UnreachableTargetIsInfeasible) {
    Tcg tcg({"a", "b", "g0"}, {{NodeId{0}, NodeId{2}, s(0), s(5)}}, NodeId{2});
    std::vector<SpaTable> tables{shortest_paths(tcg, NodeId{0}, s(0), kParams),
                                 shortest_paths(tcg, NodeId{1}, s(0), kParams)};
    try {
        user_query_delay(tcg, tables, NodeId{2});
        FAIL() << "expected InfeasibleQuery";
    } catch (const InfeasibleQuery& e) {
        EXPECT_EQ(e.unreachable(), std::vector<std::string>{"b"});
    }
}

TEST(FormatSeconds, SentinelAndSixDecimals) {
    EXPECT_EQ(format_seconds(kInf), "inf");
    EXPECT_EQ(format_seconds(s(6.1)), "6.100000");
}
