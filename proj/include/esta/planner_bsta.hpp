#pragma once

#include <span>
#include <vector>

#include "esta/energy.hpp"
#include "esta/planner_stat.hpp"
#include "esta/spa.hpp"
#include "esta/tcg.hpp"

namespace esta {

struct Hop {
    NodeId from;
    NodeId to;
    Micros send;
    Micros arrive;
};

/// One target's shortest path with the earliest feasible send on every hop.
struct PathPlan {
    NodeId target;
    Micros t_gen;
    std::vector<Hop> hops;

    Micros arrival() const { return hops.empty() ? t_gen : hops.back().arrive; }
};

/// Shortest-path plan per target, in target id order. Throws InfeasibleQuery
/// if any target cannot reach g0.
std::vector<PathPlan> plan_bsta(const Tcg& tcg, NodeId g0, std::span<const NodeId> targets, const SpaTables& tables,
                                TransmitParams params);

struct BstaReplay {
    TransmissionPlan plan;       // merged transmissions
    std::size_t transmissions = 0;
    std::vector<std::pair<NodeId, Micros>> arrivals;  // per target, arrival at g0
};

/// Replays all paths on one timeline. When a packet is sent, every other
/// packet held at the same node whose next hop is the same node rides along
/// and from then on follows the sender's path. The sender is the packet with
/// the earliest scheduled send (ties: smaller target id).
BstaReplay replay_bsta(const Tcg& tcg, NodeId g0, std::span<const PathPlan> plans, TransmitParams params);

/// Energy of the merged replay.
double bsta_energy(const Tcg& tcg, NodeId g0, std::span<const PathPlan> plans, TransmitParams params,
                   const EnergyModel& model = {});

/// Sum of per-target shortest-path hop counts (no aggregation at all).
double independent_paths_energy(std::span<const PathPlan> plans, const EnergyModel& model = {});

}  // namespace esta
