#include "esta/planner_bsta.hpp"

#include <algorithm>
#include <tuple>

#include "esta/errors.hpp"

namespace esta {

std::vector<PathPlan> plan_bsta(const Tcg& tcg, NodeId g0, std::span<const NodeId> targets_in, const SpaTables& tables,
                                TransmitParams params) {
    std::vector<NodeId> targets(targets_in.begin(), targets_in.end());
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    std::vector<SpaTable> used;
    for (NodeId s : targets) {
        used.push_back(tables.at(s));
    }
    user_query_delay(tcg, used, g0);  // throws on unreachable targets

    std::vector<PathPlan> plans;
    for (NodeId s : targets) {
        const SpaTable& table = tables.at(s);
        const auto path = table.path_to(g0);
        PathPlan plan{s, table.t_gen, {}};
        Micros t = table.t_gen;
        for (std::size_t h = 0; h + 1 < path.size(); ++h) {
            auto hop = earliest_hop(tcg, path[h], path[h + 1], t, params.t_trans);
            if (!hop || hop->arrive != table.T(path[h + 1])) {
                throw InternalConsistencyError("shortest path of " + tcg.name(s) + " does not replay");
            }
            plan.hops.push_back({path[h], path[h + 1], hop->send, hop->arrive});
            t = hop->arrive;
        }
        plans.push_back(std::move(plan));
    }
    return plans;
}

namespace {

struct Packet {
    std::vector<NodeId> carries;  // sorted; front() is the leader's target
    std::vector<NodeId> path;     // leader's remaining path, path[pos] = current node
    std::size_t pos = 0;
    Micros at;                    // arrival at path[pos]
    std::optional<HopSchedule> next;
    bool alive = true;
};

}  // namespace

BstaReplay replay_bsta(const Tcg& tcg, NodeId g0, std::span<const PathPlan> plans, TransmitParams params) {
    BstaReplay out;
    std::vector<Packet> packets;
    auto plan_next = [&](Packet& p) {
        p.next.reset();
        if (p.path[p.pos] == g0) {
            return;
        }
        p.next = earliest_hop(tcg, p.path[p.pos], p.path[p.pos + 1], p.at, params.t_trans);
        if (!p.next) {
            throw InternalConsistencyError("BSTA replay found an infeasible hop");
        }
    };
    for (const auto& plan : plans) {
        Packet p;
        p.carries = {plan.target};
        p.path.push_back(plan.target);
        for (const auto& h : plan.hops) {
            p.path.push_back(h.to);
        }
        p.at = plan.t_gen;
        packets.push_back(std::move(p));
    }
    for (auto& p : packets) {
        plan_next(p);
    }

    while (true) {
        Packet* sender = nullptr;
        for (auto& p : packets) {
            if (!p.alive || !p.next) {
                continue;
            }
            if (!sender || std::tie(p.next->send, p.carries.front()) < std::tie(sender->next->send, sender->carries.front())) {
                sender = &p;
            }
        }
        if (!sender) {
            break;
        }
        const NodeId here = sender->path[sender->pos];
        const NodeId there = sender->path[sender->pos + 1];
        for (auto& p : packets) {
            if (&p == sender || !p.alive || !p.next) {
                continue;
            }
            if (p.path[p.pos] == here && p.path[p.pos + 1] == there && p.at <= sender->next->send) {
                sender->carries.insert(sender->carries.end(), p.carries.begin(), p.carries.end());
                p.alive = false;
            }
        }
        std::sort(sender->carries.begin(), sender->carries.end());
        out.plan.sends.push_back({here, there, sender->next->send, sender->next->arrive, sender->carries});
        ++out.transmissions;
        sender->at = sender->next->arrive;
        ++sender->pos;
        plan_next(*sender);
        if (there == g0) {
            for (NodeId s : sender->carries) {
                out.arrivals.emplace_back(s, sender->at);
            }
            out.plan.completion = std::max(out.plan.completion.value_or(sender->at), sender->at);
        }
    }
    std::sort(out.arrivals.begin(), out.arrivals.end());
    return out;
}

double bsta_energy(const Tcg& tcg, NodeId g0, std::span<const PathPlan> plans, TransmitParams params,
                   const EnergyModel& model) {
    return static_cast<double>(replay_bsta(tcg, g0, plans, params).transmissions) * model.per_hop();
}

double independent_paths_energy(std::span<const PathPlan> plans, const EnergyModel& model) {
    std::size_t hops = 0;
    for (const auto& p : plans) {
        hops += p.hops.size();
    }
    return static_cast<double>(hops) * model.per_hop();
}

}  // namespace esta
