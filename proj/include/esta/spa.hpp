#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "esta/node.hpp"
#include "esta/tcg.hpp"
#include "esta/time.hpp"

namespace esta {

struct TransmitParams {
    Micros t_trans = Micros::from_seconds(0.1);

    /// packet_size / throughput, rounded to the nearest microsecond.
    static TransmitParams from_link(double packet_size_bytes, double throughput_bytes_per_s);
};

/// True iff a packet held from `t_rx` can cross `window` completely:
/// max(t_rx, begin) + t_trans <= end.
bool forwardable(Micros t_rx, ContactWindow window, Micros t_trans);

/// Arrival time at the far end when sending over `window`, or nullopt when
/// the window cannot carry the packet.
std::optional<Micros> hop_arrival(Micros t_rx, ContactWindow window, Micros t_trans);

/// Earliest arrival over the first window of (from, to) that can carry a
/// packet held at `from` since `t_rx`. Windows are disjoint and sorted, so the
/// first feasible one is also the earliest arrival.
struct HopSchedule {
    ContactWindow window;
    Micros send;
    Micros arrive;
};
std::optional<HopSchedule> earliest_hop(const Tcg& tcg, NodeId from, NodeId to, Micros t_rx, Micros t_trans);

inline constexpr std::uint32_t kUnreachableHops = std::numeric_limits<std::uint32_t>::max();

/// Earliest-delivery labels from one source to every node.
struct SpaTable {
    NodeId source;
    Micros t_gen;
    std::vector<Micros> arrival;             // T; Micros::unreachable() when no path
    std::vector<std::optional<NodeId>> prev;
    std::vector<std::uint32_t> hops;         // H; kUnreachableHops when no path

    bool reachable(NodeId v) const { return !arrival.at(v.value).is_unreachable(); }
    Micros T(NodeId v) const { return arrival.at(v.value); }
    std::uint32_t H(NodeId v) const { return hops.at(v.value); }
    /// Nodes from source to v inclusive; empty when v is unreachable.
    std::vector<NodeId> path_to(NodeId v) const;
};

/// Label-setting earliest-delivery search (store-carry-forward).
///
/// The candidate arrival over window w out of a settled node u is
/// max(T[u], w.begin) + t_trans, accepted only when it fits inside w and is
/// strictly earlier than the current label. Frontier ties settle by smaller
/// node id. The TCG's ground station, once settled, relaxes nothing unless it
/// is itself the source.
SpaTable shortest_paths(const Tcg& tcg, NodeId source, Micros t_gen, TransmitParams params);

/// Per-target tables keyed by target node.
using SpaTables = std::map<NodeId, SpaTable>;

/// max over targets of T[g0]. Throws InfeasibleQuery listing every target
/// that cannot reach g0. Zero targets give Micros::zero().
Micros user_query_delay(const Tcg& tcg, std::span<const SpaTable> tables, NodeId g0);

}  // namespace esta
