#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "esta/energy.hpp"
#include "esta/node.hpp"
#include "esta/spa.hpp"
#include "esta/tcg.hpp"
#include "esta/time.hpp"

namespace esta {

/// Targets of u_i that can transit neighbor `via` over `window` and still
/// reach u_i by u_i's deadline. `deadline` is the time by which those
/// results must be at `via`.
struct DeliverableSet {
    NodeId via;
    ContactWindow window;
    std::vector<NodeId> targets;  // sorted
    Micros deadline;
};

/// Deliverable target computation for every (neighbor, window) pair.
/// One DeliverableSet per window, empty sets included, in (via, begin) order.
std::vector<DeliverableSet> dtu(NodeId ui, std::span<const NodeId> targets_i, Micros deadline_i,
                                std::span<const NodeId> neighbors, const Tcg& tcg, const SpaTables& tables,
                                TransmitParams params);

struct MscResult {
    std::vector<DeliverableSet> chosen;  // pairwise disjoint targets, in pick order
    std::vector<NodeId> uncovered;
};

/// Greedy set cover: pick the set covering most uncovered targets; ties go
/// to the smallest max H(u_s, via) over its uncovered targets, then to the
/// smaller via id, then the earlier window. Covered targets are removed from
/// every remaining set after each pick. At most one set per via is chosen.
MscResult msc(std::span<const NodeId> targets_i, std::vector<DeliverableSet> candidates, const SpaTables& tables);

struct StatNode {
    NodeId id;
    std::optional<std::size_t> parent;  // index into AggregationTree::nodes
    std::vector<std::size_t> children;
    std::vector<NodeId> targets;  // results flowing through this node, self included
    Micros deadline;              // results must be here by this time
    bool grafted = false;         // added by the stranded-target fallback
};

/// A stranded target that could not be grafted. It travels its own shortest
/// path up to the first tree node reached by that node's deadline (g0 at the
/// latest), where its result joins the tree packet.
struct IndependentPath {
    NodeId target;
    std::vector<NodeId> path;
};

/// Spatial-temporal aggregation tree. nodes[0] is the ground station; every
/// non-leaf merges its children's results into one packet.
struct AggregationTree {
    Micros t_d = Micros::zero();
    Micros t_nd = Micros::zero();
    std::vector<StatNode> nodes;
    std::vector<NodeId> fallback_targets;
    std::vector<IndependentPath> independent;

    const StatNode& root() const { return nodes.front(); }
    std::optional<std::size_t> index_of(NodeId id) const;
    std::size_t edge_count() const { return nodes.empty() ? 0 : nodes.size() - 1; }
    std::size_t fallback_count() const { return fallback_targets.size(); }
};

struct StatOptions {
    /// A target that has just attached as a leaf of u_i may also be picked
    /// as a relay for u_i's other pending targets. Off gives the strict
    /// visited-set rule, under which attached leaves are never relays.
    bool target_relays = true;
};

/// Queue-driven tree construction rooted at g0 with root deadline t_d + zeta.
///
/// Dequeued node u_i first adopts neighboring pending targets as leaves, then
/// runs dtu + msc over its remaining targets and enqueues the chosen relays.
/// Nodes already in the tree are never considered again, apart from the
/// leaves u_i adopted in the same step (see StatOptions). Targets still
/// unplaced when the queue empties are grafted by the fewest-hop chain that
/// avoids the tree and meets some tree node's deadline, or else follow their
/// shortest path into the tree. Relays that end up carrying nothing are pruned.
///
/// `tables` must hold a table for every target; each table's t_gen is that
/// target's generation time. Throws InfeasibleQuery if a target cannot reach g0.
AggregationTree build_stat(const Tcg& tcg, NodeId g0, std::span<const NodeId> targets, const SpaTables& tables,
                           Micros zeta, TransmitParams params, StatOptions options = {});

/// Convenience overload computing the SPA tables first.
AggregationTree build_stat(const Tcg& tcg, NodeId g0, std::span<const NodeId> targets,
                           const std::map<NodeId, Micros>& t_gen, Micros zeta, TransmitParams params,
                           StatOptions options = {});

/// Hops of the independent paths once paths that continue identically from
/// some node on are merged there.
std::size_t independent_hop_count(const AggregationTree& tree);
/// One packet per tree edge plus one per merged independent hop.
double plan_energy(const AggregationTree& tree, const EnergyModel& model = {});

struct Transmission {
    NodeId from;
    NodeId to;
    Micros send;
    Micros arrive;
    std::vector<NodeId> carries;  // targets whose results are in the packet
};

struct TransmissionPlan {
    std::vector<Transmission> sends;
    std::optional<Micros> completion;  // last arrival at the ground station
};

/// Sends every tree packet as soon as all inputs are present and a window
/// allows. Throws InternalConsistencyError if a hop is infeasible or lands
/// after the receiving node's deadline.
TransmissionPlan schedule_tree(const AggregationTree& tree, const Tcg& tcg, const SpaTables& tables,
                               TransmitParams params);

}  // namespace esta
