#include <gtest/gtest.h>

#include <random>
#include <set>

#include "esta/errors.hpp"
#include "esta/planner_stat.hpp"
#include "oracles.hpp"
#include "worked_example.hpp"

using namespace esta;

namespace {

Micros s(double v) { return Micros::from_seconds(v); }
const TransmitParams kParams{s(0.1)};

struct Example {
    Tcg tcg = worked_example();
    NodeId g0 = tcg.id("g0");
    std::vector<NodeId> targets{tcg.id("u1"), tcg.id("u2"), tcg.id("u3")};
    SpaTables tables;

    Example() {
        for (NodeId t : targets) {
            tables.emplace(t, shortest_paths(tcg, t, s(0), kParams));
        }
    }
    std::vector<std::string> names(std::span<const NodeId> ids) const {
        std::vector<std::string> out;
        for (auto v : ids) out.push_back(tcg.name(v));
        return out;
    }
    // Parenthesised tree, children in index order: g0(u9(u5(u1,u2)),...).
    std::string shape(const AggregationTree& tree, std::size_t i = 0) const {
        std::string out = tcg.name(tree.nodes[i].id);
        if (!tree.nodes[i].children.empty()) {
            out += "(";
            for (std::size_t k = 0; k < tree.nodes[i].children.size(); ++k) {
                out += (k ? "," : "") + shape(tree, tree.nodes[i].children[k]);
            }
            out += ")";
        }
        return out;
    }
};

// Results delivered to each node by the schedule, checked against deadlines.
void expect_schedule_meets_deadlines(const Example& ex, const AggregationTree& tree) {
    auto plan = schedule_tree(tree, ex.tcg, ex.tables, kParams);
    for (const auto& tx : plan.sends) {
        EXPECT_TRUE(std::any_of(ex.tcg.incident(tx.from).begin(), ex.tcg.incident(tx.from).end(), [&](auto& inc) {
            return inc.other == tx.to && tx.send >= inc.window.begin && tx.send + kParams.t_trans <= inc.window.end;
        }));
        if (auto k = tree.index_of(tx.to)) {
            EXPECT_LE(tx.arrive, tree.nodes[*k].deadline) << ex.tcg.name(tx.from) << "->" << ex.tcg.name(tx.to);
        }
    }
    ASSERT_TRUE(plan.completion.has_value());
    EXPECT_LE(*plan.completion, tree.t_nd);
}

}  // namespace

TEST(Dtu, WorkedExampleAtGroundStation) {
    Example ex;
    auto nbrs = ex.tcg.neighbors(ex.g0);
    auto sets = dtu(ex.g0, ex.targets, s(6.1), nbrs, ex.tcg, ex.tables, kParams);
    ASSERT_EQ(sets.size(), 3u);
    EXPECT_EQ(ex.tcg.name(sets[0].via), "u8");
    EXPECT_EQ(ex.names(sets[0].targets), (std::vector<std::string>{"u1", "u2"}));
    EXPECT_EQ(sets[0].deadline, s(6.0));
    EXPECT_EQ(ex.names(sets[1].targets), (std::vector<std::string>{"u1", "u2"}));
    EXPECT_EQ(ex.tcg.name(sets[2].via), "u10");
    EXPECT_EQ(ex.names(sets[2].targets), (std::vector<std::string>{"u3"}));
}

TEST(Dtu, ClosedWindowGivesEmptySet) {
    Example ex;
    // u1-u4 closes at 2; nothing from u3 can use it.
    std::vector<NodeId> nbr{ex.tcg.id("u4")};
    std::vector<NodeId> only3{ex.tcg.id("u3")};
    auto sets = dtu(ex.tcg.id("u1"), only3, s(6.1), nbr, ex.tcg, ex.tables, kParams);
    ASSERT_EQ(sets.size(), 1u);
    EXPECT_TRUE(sets[0].targets.empty());
}

TEST(Msc, HopTieBreakPrefersU9) {
    Example ex;
    auto sets = dtu(ex.g0, ex.targets, s(6.1), ex.tcg.neighbors(ex.g0), ex.tcg, ex.tables, kParams);
    auto cover = msc(ex.targets, sets, ex.tables);
    ASSERT_EQ(cover.chosen.size(), 2u);
    EXPECT_EQ(ex.tcg.name(cover.chosen[0].via), "u9");
    EXPECT_EQ(ex.tcg.name(cover.chosen[1].via), "u10");
    EXPECT_TRUE(cover.uncovered.empty());
}

TEST(Msc, SingleSetCoversAll) {
    Example ex;
    DeliverableSet all{ex.tcg.id("u9"), {s(5), s(9)}, ex.targets, s(6)};
    auto cover = msc(ex.targets, {all}, ex.tables);
    ASSERT_EQ(cover.chosen.size(), 1u);
    EXPECT_TRUE(cover.uncovered.empty());
}

TEST(Msc, GreedyWithinHarmonicBoundOfExact) {
    std::mt19937_64 rng(11);
    const double h8 = 1 + 1 / 2.0 + 1 / 3.0 + 1 / 4.0 + 1 / 5.0 + 1 / 6.0 + 1 / 7.0 + 1 / 8.0;
    std::size_t greedy_total = 0;
    std::size_t exact_total = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int m = std::uniform_int_distribution<int>(1, 8)(rng);
        const int k = std::uniform_int_distribution<int>(1, 10)(rng);
        // Elements are nodes 0..m-1, vias are nodes 8..8+k-1.
        SpaTables tables;
        std::vector<NodeId> universe;
        for (int e = 0; e < m; ++e) {
            SpaTable t;
            t.source = NodeId{static_cast<std::uint32_t>(e)};
            t.hops.resize(18);
            for (auto& h : t.hops) h = std::uniform_int_distribution<std::uint32_t>(1, 6)(rng);
            tables.emplace(t.source, t);
            universe.push_back(t.source);
        }
        std::vector<DeliverableSet> sets;
        std::vector<std::vector<int>> plain;
        for (int j = 0; j < k; ++j) {
            DeliverableSet d{NodeId{static_cast<std::uint32_t>(8 + j)}, {s(0), s(1)}, {}, s(1)};
            std::vector<int> p;
            for (int e = 0; e < m; ++e) {
                if (rng() % 3 == 0) {
                    d.targets.push_back(NodeId{static_cast<std::uint32_t>(e)});
                    p.push_back(e);
                }
            }
            sets.push_back(d);
            plain.push_back(p);
        }
        std::vector<int> ints(m);
        std::iota(ints.begin(), ints.end(), 0);
        const std::size_t best = oracle::exact_min_cover(plain, ints);
        auto cover = msc(universe, sets, tables);

        std::set<int> coverable;
        for (auto& p : plain) coverable.insert(p.begin(), p.end());
        EXPECT_EQ(cover.uncovered.size(), static_cast<std::size_t>(m) - coverable.size()) << trial;
        EXPECT_LE(static_cast<double>(cover.chosen.size()), static_cast<double>(best) * h8) << trial;
        std::set<NodeId> seen;
        for (auto& c : cover.chosen) {
            for (auto t : c.targets) EXPECT_TRUE(seen.insert(t).second) << "sets overlap in trial " << trial;
        }
        greedy_total += cover.chosen.size();
        exact_total += best;
    }
    EXPECT_EQ(exact_total, 366u);
    EXPECT_GE(greedy_total, exact_total);
}

TEST(StaTree, ZetaZeroMatchesFigure) {
    Example ex;
    auto tree = build_stat(ex.tcg, ex.g0, ex.targets, ex.tables, s(0), kParams);
    EXPECT_EQ(tree.t_d, s(6.1));
    EXPECT_EQ(tree.t_nd, s(6.1));
    EXPECT_EQ(ex.shape(tree), "g0(u9(u5(u1,u2)),u10(u7(u3)))");
    EXPECT_EQ(tree.fallback_count(), 0u);
    EXPECT_EQ(plan_energy(tree), 7.0);
    // Root children partition the targets.
    std::vector<NodeId> all;
    for (auto c : tree.root().children) {
        all.insert(all.end(), tree.nodes[c].targets.begin(), tree.nodes[c].targets.end());
    }
    std::sort(all.begin(), all.end());
    EXPECT_EQ(all, ex.targets);
    expect_schedule_meets_deadlines(ex, tree);
}

TEST(StaTree, ZetaOneAggregatesAtU9) {
    Example ex;
    auto tree = build_stat(ex.tcg, ex.g0, ex.targets, ex.tables, s(1), kParams);
    EXPECT_EQ(tree.t_nd, s(7.1));
    EXPECT_EQ(ex.shape(tree), "g0(u9(u5(u1,u2),u6(u3)))");
    EXPECT_EQ(plan_energy(tree), 6.0);
    EXPECT_EQ(ex.names(tree.fallback_targets), std::vector<std::string>{"u3"});
    expect_schedule_meets_deadlines(ex, tree);
}

TEST(StaTree, StrictVisitedRuleGivesSameWorkedTrees) {
    Example ex;
    for (double z : {0.0, 1.0}) {
        auto a = build_stat(ex.tcg, ex.g0, ex.targets, ex.tables, s(z), kParams, StatOptions{true});
        auto b = build_stat(ex.tcg, ex.g0, ex.targets, ex.tables, s(z), kParams, StatOptions{false});
        EXPECT_EQ(ex.shape(a), ex.shape(b));
    }
}

TEST(StaTree, SingleTargetNextToGround) {
    Tcg tcg({"a", "g0"}, {{NodeId{0}, NodeId{1}, s(0), s(5)}}, NodeId{1});
    std::map<NodeId, Micros> gen{{NodeId{0}, s(0)}};
    std::vector<NodeId> t{NodeId{0}};
    auto tree = build_stat(tcg, NodeId{1}, t, gen, s(0), kParams);
    ASSERT_EQ(tree.nodes.size(), 2u);
    EXPECT_EQ(tree.t_d, s(0.1));
    EXPECT_EQ(plan_energy(tree), 1.0);
}

TEST(StaTree, SingleTargetChain) {
    Example ex;
    std::vector<NodeId> t{ex.tcg.id("u1")};
    auto tree = build_stat(ex.tcg, ex.g0, t, ex.tables, s(0), kParams);
    EXPECT_EQ(ex.shape(tree), "g0(u8(u4(u1)))");
    EXPECT_EQ(plan_energy(tree), 3.0);
}

TEST(StaTree, EmptyTargets) {
    Example ex;
    auto tree = build_stat(ex.tcg, ex.g0, {}, ex.tables, s(0), kParams);
    EXPECT_EQ(tree.nodes.size(), 1u);
    EXPECT_EQ(plan_energy(tree), 0.0);
    EXPECT_FALSE(schedule_tree(tree, ex.tcg, ex.tables, kParams).completion.has_value());
}

TEST(StaTree, RejectsBadInput) {
    Example ex;
    std::vector<NodeId> t{ex.tcg.id("u6")};
    EXPECT_THROW(build_stat(ex.tcg, ex.g0, t, ex.tables, s(0), kParams), InvalidArgument);
    EXPECT_THROW(build_stat(ex.tcg, ex.g0, ex.targets, ex.tables, s(-1), kParams), InvalidArgument);
    Tcg cut({"a", "g0"}, {}, NodeId{1});
    std::map<NodeId, Micros> gen{{NodeId{0}, s(0)}};
    std::vector<NodeId> a{NodeId{0}};
    EXPECT_THROW(build_stat(cut, NodeId{1}, a, gen, s(0), kParams), InfeasibleQuery);
}

TEST(StaTree, Deterministic) {
    Example ex;
    auto a = build_stat(ex.tcg, ex.g0, ex.targets, ex.tables, s(0.5), kParams);
    auto b = build_stat(ex.tcg, ex.g0, ex.targets, ex.tables, s(0.5), kParams);
    EXPECT_EQ(ex.shape(a), ex.shape(b));
}

TEST(PlanEnergy, IndependentPathsShareCommonTails) {
    AggregationTree tree;
    tree.nodes.push_back(StatNode{NodeId{9}, std::nullopt, {}, {}, s(1), false});
    // Distinct tails: 1349, 2349, 349, 549, 49.
    tree.independent.push_back({NodeId{1}, {NodeId{1}, NodeId{3}, NodeId{4}, NodeId{9}}});
    tree.independent.push_back({NodeId{2}, {NodeId{2}, NodeId{3}, NodeId{4}, NodeId{9}}});
    tree.independent.push_back({NodeId{5}, {NodeId{5}, NodeId{4}, NodeId{9}}});
    EXPECT_EQ(independent_hop_count(tree), 5u);
    EXPECT_EQ(plan_energy(tree), 5.0);
    EnergyModel bytes{1.0, 0.5, EnergyMode::LinearInBytes, 100};
    EXPECT_EQ(plan_energy(tree, bytes), 750.0);
}

TEST(StaTree, RandomGraphInvariants) {
    std::mt19937_64 rng(5);
    int trees = 0;
    int handed_early = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 8;
        auto base = oracle::random_tcg(rng, n, 14);
        // Last node plays the ground station.
        Tcg tcg({base.names().begin(), base.names().end()}, {base.edges().begin(), base.edges().end()},
                NodeId{n - 1});
        const NodeId g0{n - 1};
        SpaTables tables;
        std::vector<NodeId> targets;
        for (std::uint32_t v = 0; v + 1 < n; ++v) {
            if (rng() % 2 == 0) continue;
            auto t = shortest_paths(tcg, NodeId{v}, s(static_cast<double>(rng() % 5)), kParams);
            if (!t.reachable(g0)) continue;
            tables.emplace(NodeId{v}, t);
            targets.push_back(NodeId{v});
        }
        for (double z : {0.0, 2.0}) {
            for (bool relays : {true, false}) {
                auto tree = build_stat(tcg, g0, targets, tables, s(z), kParams, StatOptions{relays});
                ++trees;
                // Every target exactly once, as a node or an independent path.
                std::vector<NodeId> seen;
                for (const auto& node : tree.nodes) {
                    if (std::binary_search(targets.begin(), targets.end(), node.id)) seen.push_back(node.id);
                    std::vector<NodeId> want;
                    if (std::binary_search(targets.begin(), targets.end(), node.id)) want.push_back(node.id);
                    for (const auto& p : tree.independent) {
                        if (p.path.back() == node.id) want.push_back(p.target);
                    }
                    for (auto c : node.children) {
                        EXPECT_EQ(tree.nodes[c].parent, tree.index_of(node.id));
                        want.insert(want.end(), tree.nodes[c].targets.begin(), tree.nodes[c].targets.end());
                    }
                    std::sort(want.begin(), want.end());
                    EXPECT_EQ(node.targets, want);
                }
                for (const auto& p : tree.independent) {
                    seen.push_back(p.target);
                    ASSERT_EQ(p.path.front(), p.target);
                    ASSERT_TRUE(tree.index_of(p.path.back())) << "independent path ends outside the tree";
                    handed_early += p.path.back() != g0;
                }
                std::sort(seen.begin(), seen.end());
                EXPECT_EQ(seen, targets) << "trial " << trial;
                EXPECT_EQ(tree.t_nd, tree.t_d + s(z));
                auto plan = schedule_tree(tree, tcg, tables, kParams);
                if (!targets.empty()) {
                    ASSERT_TRUE(plan.completion.has_value());
                    EXPECT_LE(*plan.completion, tree.t_nd);
                }
            }
        }
    }
    EXPECT_EQ(trees, 1200);
    EXPECT_GT(handed_early, 0);
}
