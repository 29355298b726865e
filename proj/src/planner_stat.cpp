#include "esta/planner_stat.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <tuple>

#include "esta/errors.hpp"

namespace esta {
namespace {

bool contains(std::span<const NodeId> sorted, NodeId v) { return std::binary_search(sorted.begin(), sorted.end(), v); }

std::vector<NodeId> sorted_unique(std::span<const NodeId> in) {
    std::vector<NodeId> out(in.begin(), in.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::uint32_t max_hop(std::span<const NodeId> targets, NodeId via, const SpaTables& tables) {
    std::uint32_t worst = 0;
    for (NodeId s : targets) {
        worst = std::max(worst, tables.at(s).H(via));
    }
    return worst;
}

/// Latest-deadline window of (child, parent) that can carry a packet ready
/// at `ready` into parent by `parent_deadline`; returns the child deadline.
std::optional<Micros> child_deadline(const Tcg& tcg, NodeId child, NodeId parent, Micros ready,
                                     Micros parent_deadline, Micros t_trans) {
    std::optional<Micros> best;
    for (const auto& w : edge_window(tcg, child, parent)) {
        const Micros limit = std::min(w.end, parent_deadline);
        if (std::max(ready, w.begin) + t_trans <= limit) {
            best = std::max(best.value_or(limit - t_trans), limit - t_trans);
        }
    }
    return best;
}

}  // namespace

std::vector<DeliverableSet> dtu(NodeId ui, std::span<const NodeId> targets_i, Micros deadline_i,
                                std::span<const NodeId> neighbors, const Tcg& tcg, const SpaTables& tables,
                                TransmitParams params) {
    std::vector<DeliverableSet> out;
    for (NodeId uj : neighbors) {
        for (const auto& w : edge_window(tcg, ui, uj)) {
            DeliverableSet set{uj, w, {}, std::min(deadline_i, w.end) - params.t_trans};
            const Micros limit = std::min(w.end, deadline_i);
            for (NodeId us : targets_i) {
                const Micros t = tables.at(us).T(uj);
                if (!t.is_unreachable() && std::max(t, w.begin) + params.t_trans <= limit) {
                    set.targets.push_back(us);
                }
            }
            std::sort(set.targets.begin(), set.targets.end());
            out.push_back(std::move(set));
        }
    }
    return out;
}

MscResult msc(std::span<const NodeId> targets_i, std::vector<DeliverableSet> candidates, const SpaTables& tables) {
    MscResult result;
    std::vector<NodeId> uncovered = sorted_unique(targets_i);
    for (auto& c : candidates) {
        std::vector<NodeId> kept;
        std::set_intersection(c.targets.begin(), c.targets.end(), uncovered.begin(), uncovered.end(),
                              std::back_inserter(kept));
        c.targets = std::move(kept);
    }

    while (!uncovered.empty()) {
        auto key = [&](const DeliverableSet& c) {
            // Smaller key wins.
            return std::make_tuple(-static_cast<std::int64_t>(c.targets.size()), max_hop(c.targets, c.via, tables),
                                   c.via, c.window.begin);
        };
        auto best = std::min_element(candidates.begin(), candidates.end(),
                                     [&](const auto& x, const auto& y) { return key(x) < key(y); });
        if (best == candidates.end() || best->targets.empty()) {
            break;
        }
        DeliverableSet pick = std::move(*best);
        candidates.erase(best);
        std::erase_if(candidates, [&](const DeliverableSet& c) { return c.via == pick.via; });
        for (auto& c : candidates) {
            std::vector<NodeId> rest;
            std::set_difference(c.targets.begin(), c.targets.end(), pick.targets.begin(), pick.targets.end(),
                                std::back_inserter(rest));
            c.targets = std::move(rest);
        }
        std::vector<NodeId> rest;
        std::set_difference(uncovered.begin(), uncovered.end(), pick.targets.begin(), pick.targets.end(),
                            std::back_inserter(rest));
        uncovered = std::move(rest);
        result.chosen.push_back(std::move(pick));
    }
    result.uncovered = std::move(uncovered);
    return result;
}

std::optional<std::size_t> AggregationTree::index_of(NodeId id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

AggregationTree build_stat(const Tcg& tcg, NodeId g0, std::span<const NodeId> targets_in, const SpaTables& tables,
                           Micros zeta, TransmitParams params, StatOptions options) {
    if (zeta < Micros::zero()) {
        throw InvalidArgument("slack zeta must be non-negative");
    }
    const std::vector<NodeId> targets = sorted_unique(targets_in);
    for (NodeId s : targets) {
        if (s == g0) {
            throw InvalidArgument("the ground station cannot be a target");
        }
        if (!tables.contains(s)) {
            throw InvalidArgument("missing SPA table for target '" + tcg.name(s) + "'");
        }
    }

    AggregationTree tree;
    std::vector<SpaTable> target_tables;
    for (NodeId s : targets) {
        target_tables.push_back(tables.at(s));
    }
    tree.t_d = user_query_delay(tcg, target_tables, g0);
    tree.t_nd = tree.t_d + zeta;
    tree.nodes.push_back(StatNode{g0, std::nullopt, {}, {}, tree.t_nd, false});
    if (targets.empty()) {
        return tree;
    }

    const Micros tt = params.t_trans;
    auto t_gen = [&](NodeId s) { return tables.at(s).t_gen; };
    auto is_target = [&](NodeId v) { return contains(targets, v); };

    std::vector<bool> in_tree(tcg.node_count(), false);
    in_tree[g0.value] = true;
    std::size_t placed = 0;
    std::vector<std::vector<NodeId>> pending{targets};

    auto add_node = [&](std::size_t parent, NodeId id, Micros deadline, std::vector<NodeId> assigned, bool grafted) {
        tree.nodes.push_back(StatNode{id, parent, {}, {}, deadline, grafted});
        const std::size_t idx = tree.nodes.size() - 1;
        tree.nodes[parent].children.push_back(idx);
        pending.push_back(std::move(assigned));
        in_tree[id.value] = true;
        if (is_target(id)) {
            ++placed;
        }
        return idx;
    };

    std::deque<std::size_t> queue{0};
    while (!queue.empty() && placed < targets.size()) {
        const std::size_t i = queue.front();
        queue.pop_front();
        const NodeId ui = tree.nodes[i].id;
        const Micros deadline_i = tree.nodes[i].deadline;

        std::vector<NodeId> pend;
        for (NodeId s : pending[i]) {
            if (!in_tree[s.value]) {
                pend.push_back(s);
            }
        }
        std::vector<NodeId> nbrs;
        for (NodeId v : tcg.neighbors(ui)) {
            if (!in_tree[v.value]) {
                nbrs.push_back(v);
            }
        }

        // Pending targets next to u_i hang off it directly when their own
        // result can cross a window in time.
        std::vector<NodeId> relays;
        std::map<NodeId, std::size_t> leaves;
        for (NodeId uj : nbrs) {
            if (contains(pend, uj)) {
                if (auto dl = child_deadline(tcg, uj, ui, t_gen(uj), deadline_i, tt)) {
                    leaves[uj] = add_node(i, uj, *dl, {}, false);
                    std::erase(pend, uj);
                    if (options.target_relays) {
                        relays.push_back(uj);
                    }
                    continue;
                }
            }
            relays.push_back(uj);
        }
        if (pend.empty()) {
            continue;
        }

        auto sets = dtu(ui, pend, deadline_i, relays, tcg, tables, params);
        for (auto& set : sets) {
            // An unplaced target may relay only if its own result fits too.
            if (is_target(set.via) &&
                std::max(t_gen(set.via), set.window.begin) + tt > std::min(set.window.end, deadline_i)) {
                set.targets.clear();
            }
        }
        std::vector<DeliverableSet> best;
        for (auto& set : sets) {
            if (set.targets.empty()) {
                continue;
            }
            if (!best.empty() && best.back().via == set.via) {
                if (set.deadline > best.back().deadline) {
                    best.back() = std::move(set);
                }
            } else {
                best.push_back(std::move(set));
            }
        }

        auto cover = msc(pend, std::move(best), tables);
        for (auto& set : cover.chosen) {
            std::vector<NodeId> assigned = set.targets;
            std::erase(assigned, set.via);
            if (auto leaf = leaves.find(set.via); leaf != leaves.end()) {
                tree.nodes[leaf->second].deadline = set.deadline;
                pending[leaf->second] = std::move(assigned);
                queue.push_back(leaf->second);
                continue;
            }
            const std::size_t child = add_node(i, set.via, set.deadline, std::move(assigned), false);
            queue.push_back(child);
        }
    }

    // Stranded targets: graft the fewest-hop chain that reaches some tree
    // node by that node's deadline, else route them on their own. Chain
    // interiors avoid the tree and unplaced targets.
    const std::size_t n = tcg.node_count();
    for (NodeId s : targets) {
        if (in_tree[s.value]) {
            continue;
        }
        tree.fallback_targets.push_back(s);
        std::vector<std::optional<std::size_t>> at_node(n);
        for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
            at_node[tree.nodes[v].id.value] = v;
        }
        auto may_relay = [&](NodeId v) { return v == s || (!in_tree[v.value] && !is_target(v)); };

        // layers[k][v]: earliest arrival at v using at most k hops.
        struct Label {
            Micros arrive = Micros::unreachable();
            std::optional<NodeId> prev;
            std::size_t prev_layer = 0;
        };
        std::vector<std::vector<Label>> layers(1, std::vector<Label>(n));
        layers[0][s.value].arrive = t_gen(s);
        std::optional<std::size_t> anchor;
        while (!anchor && layers.size() <= n) {
            const auto& last = layers.back();
            std::vector<Label> next = last;
            const std::size_t k = layers.size() - 1;
            bool changed = false;
            for (std::size_t u = 0; u < n; ++u) {
                const NodeId un{static_cast<std::uint32_t>(u)};
                if (last[u].arrive.is_unreachable() || !may_relay(un)) {
                    continue;
                }
                for (NodeId v : tcg.neighbors(un)) {
                    auto hop = earliest_hop(tcg, un, v, last[u].arrive, tt);
                    if (hop && hop->arrive < next[v.value].arrive) {
                        next[v.value] = {hop->arrive, un, k};
                        changed = true;
                    }
                }
            }
            layers.push_back(std::move(next));
            if (!changed) {
                break;
            }
            for (std::size_t v = 0; v < n; ++v) {
                const auto& label = layers.back()[v];
                if (at_node[v] && label.prev && label.arrive <= tree.nodes[*at_node[v]].deadline &&
                    (!anchor || tree.nodes[*at_node[v]].id < tree.nodes[*anchor].id)) {
                    anchor = at_node[v];
                }
            }
        }
        if (!anchor) {
            // Follow the shortest path, but hand over at the first tree node
            // it reaches in time; g0 always qualifies.
            const SpaTable& table = tables.at(s);
            auto path = table.path_to(g0);
            for (std::size_t h = 1; h < path.size(); ++h) {
                const auto at = at_node[path[h].value];
                if (at && table.T(path[h]) <= tree.nodes[*at].deadline) {
                    path.resize(h + 1);
                    break;
                }
            }
            tree.independent.push_back({s, std::move(path)});
            continue;
        }

        // Walk back from the anchor; chain[0] is the node next to it.
        std::vector<std::pair<NodeId, Micros>> chain;
        const Label* label = &layers.back()[tree.nodes[*anchor].id.value];
        while (label->prev) {
            const Label& p = layers[label->prev_layer][label->prev->value];
            chain.emplace_back(*label->prev, p.arrive);
            label = &p;
        }
        std::size_t parent = *anchor;
        for (const auto& [c, ready] : chain) {
            const StatNode& p = tree.nodes[parent];
            auto dl = child_deadline(tcg, c, p.id, ready, p.deadline, tt);
            if (!dl) {
                throw InternalConsistencyError("grafted hop " + tcg.name(c) + "->" + tcg.name(p.id) + " is infeasible");
            }
            parent = add_node(parent, c, *dl, {}, true);
        }
    }

    // Bottom-up: assigned targets, then drop relays that carry nothing.
    std::map<NodeId, std::vector<NodeId>> handed_over;
    for (const auto& ind : tree.independent) {
        handed_over[ind.path.back()].push_back(ind.target);
    }
    for (std::size_t k = tree.nodes.size(); k-- > 0;) {
        StatNode& node = tree.nodes[k];
        if (is_target(node.id)) {
            node.targets.push_back(node.id);
        }
        if (auto it = handed_over.find(node.id); it != handed_over.end()) {
            node.targets.insert(node.targets.end(), it->second.begin(), it->second.end());
        }
        for (std::size_t c : node.children) {
            const auto& ct = tree.nodes[c].targets;
            node.targets.insert(node.targets.end(), ct.begin(), ct.end());
        }
        std::sort(node.targets.begin(), node.targets.end());
    }
    std::vector<std::size_t> remap(tree.nodes.size(), SIZE_MAX);
    std::vector<StatNode> kept;
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
        if (k == 0 || !tree.nodes[k].targets.empty()) {
            remap[k] = kept.size();
            kept.push_back(tree.nodes[k]);
        }
    }
    for (auto& node : kept) {
        if (node.parent) {
            node.parent = remap[*node.parent];
        }
        std::vector<std::size_t> children;
        for (std::size_t c : node.children) {
            if (remap[c] != SIZE_MAX) {
                children.push_back(remap[c]);
            }
        }
        node.children = std::move(children);
    }
    tree.nodes = std::move(kept);
    return tree;
}

AggregationTree build_stat(const Tcg& tcg, NodeId g0, std::span<const NodeId> targets,
                           const std::map<NodeId, Micros>& t_gen, Micros zeta, TransmitParams params,
                           StatOptions options) {
    SpaTables tables;
    for (NodeId s : targets) {
        auto it = t_gen.find(s);
        tables.emplace(s, shortest_paths(tcg, s, it == t_gen.end() ? Micros::zero() : it->second, params));
    }
    return build_stat(tcg, g0, targets, tables, zeta, params, options);
}

std::size_t independent_hop_count(const AggregationTree& tree) {
    std::set<std::vector<NodeId>> suffixes;
    for (const auto& p : tree.independent) {
        for (std::size_t h = 0; h + 1 < p.path.size(); ++h) {
            suffixes.emplace(p.path.begin() + static_cast<std::ptrdiff_t>(h), p.path.end());
        }
    }
    return suffixes.size();
}

double plan_energy(const AggregationTree& tree, const EnergyModel& model) {
    const std::size_t hops = tree.edge_count() + independent_hop_count(tree);
    return static_cast<double>(hops) * model.per_hop();
}

TransmissionPlan schedule_tree(const AggregationTree& tree, const Tcg& tcg, const SpaTables& tables,
                               TransmitParams params) {
    TransmissionPlan plan;
    if (tree.nodes.empty()) {
        return plan;
    }
    std::vector<std::optional<Micros>> ready(tree.nodes.size());
    auto bump = [](std::optional<Micros>& slot, Micros t) { slot = std::max(slot.value_or(t), t); };

    // Independent paths go first since they feed the tree node they end at.
    // Paths that continue identically from some node on share one packet
    // from there; longer suffixes are upstream of shorter ones.
    struct Hold {
        std::optional<Micros> ready;
        std::vector<NodeId> carries;
    };
    std::map<std::vector<NodeId>, Hold> holds;
    for (const auto& ind : tree.independent) {
        Hold& h = holds[ind.path];
        bump(h.ready, tables.at(ind.target).t_gen);
        h.carries.push_back(ind.target);
    }
    std::size_t longest = 0;
    for (const auto& ind : tree.independent) {
        longest = std::max(longest, ind.path.size());
    }
    for (std::size_t len = longest; len >= 2; --len) {
        for (auto& [suffix, hold] : holds) {
            if (suffix.size() != len || !hold.ready) {
                continue;
            }
            auto hop = earliest_hop(tcg, suffix[0], suffix[1], *hold.ready, params.t_trans);
            if (!hop) {
                throw InternalConsistencyError("independent hop " + tcg.name(suffix[0]) + "->" +
                                               tcg.name(suffix[1]) + " is infeasible");
            }
            std::sort(hold.carries.begin(), hold.carries.end());
            plan.sends.push_back({suffix[0], suffix[1], hop->send, hop->arrive, hold.carries});
            if (len == 2) {
                const std::size_t at = *tree.index_of(suffix[1]);
                if (hop->arrive > tree.nodes[at].deadline) {
                    throw InternalConsistencyError("independent path into " + tcg.name(suffix[1]) +
                                                   " misses its deadline");
                }
                bump(ready[at], hop->arrive);
                continue;
            }
            Hold& next = holds[std::vector<NodeId>(suffix.begin() + 1, suffix.end())];
            bump(next.ready, hop->arrive);
            next.carries.insert(next.carries.end(), hold.carries.begin(), hold.carries.end());
        }
    }
    // Children always have larger indices than their parents.
    for (std::size_t k = tree.nodes.size(); k-- > 1;) {
        const StatNode& node = tree.nodes[k];
        if (std::binary_search(node.targets.begin(), node.targets.end(), node.id)) {
            bump(ready[k], tables.at(node.id).t_gen);
        }
        if (!ready[k]) {
            throw InternalConsistencyError("tree node " + tcg.name(node.id) + " has nothing to send");
        }
        const StatNode& parent = tree.nodes[*node.parent];
        auto hop = earliest_hop(tcg, node.id, parent.id, *ready[k], params.t_trans);
        if (!hop || hop->arrive > parent.deadline) {
            throw InternalConsistencyError("tree hop " + tcg.name(node.id) + "->" + tcg.name(parent.id) +
                                           " misses its deadline");
        }
        plan.sends.push_back({node.id, parent.id, hop->send, hop->arrive, node.targets});
        bump(ready[*node.parent], hop->arrive);
    }
    plan.completion = ready[0];
    std::sort(plan.sends.begin(), plan.sends.end(), [](const Transmission& a, const Transmission& b) {
        return std::tie(a.send, a.from, a.to) < std::tie(b.send, b.from, b.to);
    });
    return plan;
}

}  // namespace esta
