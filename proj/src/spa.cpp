#include "esta/spa.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <tuple>

#include "esta/errors.hpp"

namespace esta {

TransmitParams TransmitParams::from_link(double packet_size_bytes, double throughput_bytes_per_s) {
    if (!(packet_size_bytes > 0.0) || !(throughput_bytes_per_s > 0.0)) {
        throw InvalidArgument("packet size and link throughput must be positive");
    }
    TransmitParams p;
    p.t_trans = Micros::from_seconds(packet_size_bytes / throughput_bytes_per_s);
    if (p.t_trans.count() <= 0) {
        throw InvalidArgument("transmission time rounds to zero microseconds");
    }
    return p;
}

bool forwardable(Micros t_rx, ContactWindow window, Micros t_trans) {
    return std::max(t_rx, window.begin) + t_trans <= window.end;
}

std::optional<Micros> hop_arrival(Micros t_rx, ContactWindow window, Micros t_trans) {
    if (t_rx.is_unreachable() || !forwardable(t_rx, window, t_trans)) {
        return std::nullopt;
    }
    return std::max(t_rx, window.begin) + t_trans;
}

std::optional<HopSchedule> earliest_hop(const Tcg& tcg, NodeId from, NodeId to, Micros t_rx, Micros t_trans) {
    for (const auto& inc : tcg.incident(from)) {
        if (inc.other != to) {
            continue;
        }
        if (auto arrive = hop_arrival(t_rx, inc.window, t_trans)) {
            return HopSchedule{inc.window, *arrive - t_trans, *arrive};
        }
    }
    return std::nullopt;
}

std::vector<NodeId> SpaTable::path_to(NodeId v) const {
    std::vector<NodeId> path;
    if (!reachable(v)) {
        return path;
    }
    for (std::optional<NodeId> cur = v; cur; cur = prev.at(cur->value)) {
        path.push_back(*cur);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

SpaTable shortest_paths(const Tcg& tcg, NodeId source, Micros t_gen, TransmitParams params) {
    const std::size_t n = tcg.node_count();
    if (source.value >= n) {
        throw InvalidArgument("unknown SPA source node");
    }
    SpaTable table{source, t_gen, std::vector<Micros>(n, Micros::unreachable()),
                   std::vector<std::optional<NodeId>>(n), std::vector<std::uint32_t>(n, kUnreachableHops)};
    table.arrival[source.value] = t_gen;
    table.hops[source.value] = 0;

    using Entry = std::pair<Micros, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
    frontier.push({t_gen, source});
    std::vector<bool> settled(n, false);
    Micros last_settled = t_gen;
    const auto ground = tcg.ground_station();

    while (!frontier.empty()) {
        const auto [t_u, u] = frontier.top();
        frontier.pop();
        if (settled[u.value] || t_u != table.arrival[u.value]) {
            continue;
        }
        settled[u.value] = true;
        if (t_u < last_settled) {
            throw InternalConsistencyError("SPA settled nodes out of arrival order");
        }
        last_settled = t_u;
        if (ground && u == *ground && u != source) {
            continue;
        }
        for (const auto& inc : tcg.incident(u)) {
            const NodeId v = inc.other;
            if (settled[v.value]) {
                continue;
            }
            const auto arrive = hop_arrival(t_u, inc.window, params.t_trans);
            if (arrive && *arrive < table.arrival[v.value]) {
                table.arrival[v.value] = *arrive;
                table.prev[v.value] = u;
                table.hops[v.value] = table.hops[u.value] + 1;
                frontier.push({*arrive, v});
            }
        }
    }
    return table;
}

Micros user_query_delay(const Tcg& tcg, std::span<const SpaTable> tables, NodeId g0) {
    Micros worst = Micros::zero();
    std::vector<std::string> missing;
    for (const auto& table : tables) {
        if (!table.reachable(g0)) {
            missing.push_back(tcg.name(table.source));
        } else {
            worst = std::max(worst, table.T(g0));
        }
    }
    if (!missing.empty()) {
        std::string msg = "targets cannot reach " + tcg.name(g0) + ":";
        for (const auto& m : missing) {
            msg += " " + m;
        }
        throw InfeasibleQuery(msg, std::move(missing));
    }
    return worst;
}

}  // namespace esta
