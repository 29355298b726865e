#include "esta/io.hpp"

#include <fstream>

#include "esta/errors.hpp"

namespace esta::io {

namespace {

void expect_schema(const json& j, const char* schema) {
    if (!j.is_object() || !j.contains("schema")) {
        throw InvalidArgument(std::string("missing schema field, expected ") + schema);
    }
    const auto& s = j.at("schema");
    if (!s.is_string() || s.get<std::string>() != schema) {
        throw InvalidArgument("unsupported schema '" + s.dump() + "', expected " + schema);
    }
}

template <typename F>
auto parse_field(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("bad ") + what + ": " + e.what());
    }
}

std::vector<std::string> names_of(const Tcg& tcg, std::span<const NodeId> ids) {
    std::vector<std::string> out;
    for (NodeId n : ids) {
        out.push_back(tcg.name(n));
    }
    return out;
}

json tree_node(const Tcg& tcg, const AggregationTree& tree, std::size_t i) {
    const StatNode& n = tree.nodes[i];
    json children = json::array();
    for (std::size_t c : n.children) {
        children.push_back(tree_node(tcg, tree, c));
    }
    json out = {{"node", tcg.name(n.id)},
                {"deadline", time_to_json(n.deadline)},
                {"targets", names_of(tcg, n.targets)},
                {"children", std::move(children)}};
    if (n.grafted) {
        out["grafted"] = true;
    }
    return out;
}

}  // namespace

json time_to_json(Micros t) {
    if (t.is_unreachable()) {
        return "inf";
    }
    return t.seconds();
}

Micros time_from_json(const json& j) {
    if (j.is_string() && j.get<std::string>() == "inf") {
        return Micros::unreachable();
    }
    if (!j.is_number()) {
        throw InvalidArgument("time must be a number of seconds or \"inf\", got " + j.dump());
    }
    return Micros::from_seconds(j.get<double>());
}

json tcg_to_json(const Tcg& tcg) {
    json edges = json::array();
    for (const auto& e : tcg.edges()) {
        edges.push_back({{"a", tcg.name(e.a)},
                         {"b", tcg.name(e.b)},
                         {"t_begin", time_to_json(e.t_begin)},
                         {"t_end", time_to_json(e.t_end)}});
    }
    json out = {{"schema", "stat-tcg/1"}, {"nodes", tcg.names()}, {"edges", std::move(edges)}};
    if (auto g = tcg.ground_station()) {
        out["ground_station"] = tcg.name(*g);
    }
    return out;
}

Tcg tcg_from_json(const json& j) {
    expect_schema(j, "stat-tcg/1");
    return parse_field("stat-tcg/1 document", [&] {
        auto nodes = j.at("nodes").get<std::vector<std::string>>();
        std::unordered_map<std::string, NodeId> index;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            index.emplace(nodes[i], NodeId{static_cast<std::uint32_t>(i)});
        }
        auto lookup = [&](const json& name) {
            auto it = index.find(name.get<std::string>());
            if (it == index.end()) {
                throw InvalidArgument("edge endpoint '" + name.get<std::string>() + "' is not a node");
            }
            return it->second;
        };
        std::vector<TcgEdge> edges;
        for (const auto& e : j.at("edges")) {
            edges.push_back({lookup(e.at("a")), lookup(e.at("b")), time_from_json(e.at("t_begin")),
                             time_from_json(e.at("t_end"))});
        }
        std::optional<NodeId> ground;
        if (j.contains("ground_station")) {
            ground = lookup(j.at("ground_station"));
        } else if (index.contains("g0")) {
            ground = index.at("g0");
        }
        return Tcg(std::move(nodes), std::move(edges), ground);
    });
}

json scenario_to_json(const Scenario& scenario) {
    json uavs = json::array();
    for (const auto& u : scenario.uavs) {
        json wps = json::array();
        for (const auto& w : u.waypoints()) {
            wps.push_back({{"t", w.t}, {"x", w.x}, {"y", w.y}});
        }
        uavs.push_back({{"uav_id", u.uav_id()}, {"waypoints", std::move(wps)}});
    }
    return {{"schema", "stat-scenario/1"},
            {"uavs", std::move(uavs)},
            {"ground_station", {{"uav_id", scenario.ground.id}, {"x", scenario.ground.x}, {"y", scenario.ground.y}}},
            {"comm_range_m", scenario.comm_range},
            {"link_throughput_bytes_per_s", scenario.link_throughput},
            {"packet_size_bytes", scenario.packet_size}};
}

Scenario scenario_from_json(const json& j) {
    expect_schema(j, "stat-scenario/1");
    return parse_field("stat-scenario/1 document", [&] {
        Scenario sc;
        for (const auto& u : j.at("uavs")) {
            std::vector<Waypoint> wps;
            for (const auto& w : u.at("waypoints")) {
                wps.push_back({w.at("t").get<double>(), w.at("x").get<double>(), w.at("y").get<double>()});
            }
            sc.uavs.emplace_back(u.at("uav_id").get<std::string>(), std::move(wps));
        }
        const auto& g = j.at("ground_station");
        sc.ground = {g.at("uav_id").get<std::string>(), g.at("x").get<double>(), g.at("y").get<double>()};
        sc.comm_range = j.at("comm_range_m").get<double>();
        sc.link_throughput = j.at("link_throughput_bytes_per_s").get<double>();
        sc.packet_size = j.at("packet_size_bytes").get<double>();
        if (!(sc.comm_range > 0.0 && sc.link_throughput > 0.0 && sc.packet_size > 0.0)) {
            throw InvalidArgument("comm range, throughput and packet size must be positive");
        }
        return sc;
    });
}

json spa_to_json(const Tcg& tcg, const SpaTable& table) {
    json rows = json::array();
    for (std::size_t i = 0; i < tcg.node_count(); ++i) {
        const NodeId v{static_cast<std::uint32_t>(i)};
        json row = {{"node", tcg.name(v)}, {"T", time_to_json(table.T(v))}};
        row["H"] = table.reachable(v) ? json(table.H(v)) : json("inf");
        row["prev"] = table.prev[i] ? json(tcg.name(*table.prev[i])) : json(nullptr);
        rows.push_back(std::move(row));
    }
    return {{"schema", "stat-spa/1"},
            {"source", tcg.name(table.source)},
            {"t_gen", time_to_json(table.t_gen)},
            {"rows", std::move(rows)}};
}

json tree_to_json(const Tcg& tcg, const AggregationTree& tree) {
    json out = {{"schema", "stat-tree/1"},
                {"planner", "ESTA"},
                {"t_d", time_to_json(tree.t_d)},
                {"t_nd", time_to_json(tree.t_nd)},
                {"fallback_targets", names_of(tcg, tree.fallback_targets)}};
    out["root"] = tree.nodes.empty() ? json(nullptr) : tree_node(tcg, tree, 0);
    json independent = json::array();
    for (const auto& p : tree.independent) {
        independent.push_back({{"target", tcg.name(p.target)}, {"path", names_of(tcg, p.path)}});
    }
    out["independent"] = std::move(independent);
    return out;
}

json bsta_to_json(const Tcg& tcg, NodeId g0, std::span<const PathPlan> plans) {
    json children = json::array();
    Micros last = Micros::zero();
    for (const auto& p : plans) {
        const std::string target = tcg.name(p.target);
        // Build the chain from the target upward, then nest it under g0.
        json node = {{"node", target}, {"deadline", time_to_json(p.t_gen)}, {"targets", {target}},
                     {"children", json::array()}};
        for (std::size_t h = 0; h + 1 < p.hops.size(); ++h) {
            node = {{"node", tcg.name(p.hops[h].to)},
                    {"deadline", time_to_json(p.hops[h].arrive)},
                    {"targets", {target}},
                    {"children", json::array({std::move(node)})}};
        }
        children.push_back(std::move(node));
        last = std::max(last, p.arrival());
    }
    std::vector<std::string> all;
    for (const auto& p : plans) {
        all.push_back(tcg.name(p.target));
    }
    return {{"schema", "stat-tree/1"},
            {"planner", "BSTA"},
            {"t_d", time_to_json(last)},
            {"root", {{"node", tcg.name(g0)}, {"deadline", time_to_json(last)}, {"targets", all},
                      {"children", std::move(children)}}}};
}

TreeDoc tree_from_json(const json& j) {
    const json* node = &j;
    if (j.contains("schema")) {
        expect_schema(j, "stat-tree/1");
        node = &j.at("root");
    }
    return parse_field("stat-tree/1 node", [&] {
        TreeDoc doc{node->at("node").get<std::string>(), time_from_json(node->at("deadline")),
                    node->at("targets").get<std::vector<std::string>>(), {}};
        for (const auto& c : node->at("children")) {
            doc.children.push_back(tree_from_json(c));
        }
        return doc;
    });
}

json config_to_json(const ScenarioConfig& cfg) {
    return {{"area_width", cfg.area_width},
            {"area_height", cfg.area_height},
            {"n_search_uavs", cfg.n_search_uavs},
            {"n_ferry_uavs", cfg.n_ferry_uavs},
            {"uav_speed", cfg.uav_speed},
            {"comm_range", cfg.comm_range},
            {"packet_size", cfg.packet_size},
            {"link_throughput", cfg.link_throughput},
            {"sim_time", cfg.sim_time},
            {"query_time_period", cfg.query_time_period},
            {"query_region_ratio", cfg.query_region_ratio},
            {"query_count", cfg.query_count},
            {"zeta", cfg.zeta},
            {"rng_seed", cfg.rng_seed},
            {"tile_size", cfg.tile_size},
            {"lane_spacing", cfg.lane_spacing},
            {"delivery_window", cfg.delivery_window},
            {"dt", cfg.dt}};
}

json summary_to_json(const ExperimentResult& result) {
    json points = json::array();
    for (const auto& p : result.points) {
        json planners = json::object();
        for (const auto& s : p.planners) {
            planners[planner_name(s.planner)] = {{"feasible_queries", s.feasible},
                                                 {"infeasible_queries", s.infeasible},
                                                 {"mean_delay_s", s.mean_delay_s},
                                                 {"mean_energy_units", s.mean_energy},
                                                 {"mean_request_energy_units", s.mean_request_energy},
                                                 {"fallback_total", s.fallback_total}};
        }
        points.push_back({{"sweep_value", p.value},
                          {"planners", std::move(planners)},
                          {"energy_ratio_esta_over_bsta", p.energy_ratio ? json(*p.energy_ratio) : json(nullptr)}});
    }
    return {{"schema", "stat-summary/1"},
            {"sweep_var", sweep_var_name(result.sweep.var)},
            {"seeds", result.seeds},
            {"config", config_to_json(result.base)},
            {"points", std::move(points)}};
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw InvalidArgument("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

Tcg load_tcg(const std::filesystem::path& path) { return tcg_from_json(read_json(path)); }

Scenario load_scenario(const std::filesystem::path& path) { return scenario_from_json(read_json(path)); }

}  // namespace esta::io
