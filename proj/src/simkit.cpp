#include "esta/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "esta/errors.hpp"
#include "esta/planner_bsta.hpp"

namespace esta {

void ScenarioConfig::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidConfig(std::string(what) + " must be positive");
        }
    };
    positive(area_width, "area width");
    positive(area_height, "area height");
    positive(uav_speed, "uav speed");
    positive(comm_range, "comm range");
    positive(packet_size, "packet size");
    positive(link_throughput, "link throughput");
    positive(sim_time, "sim time");
    positive(query_time_period, "query time period");
    positive(tile_size, "tile size");
    positive(lane_spacing, "lane spacing");
    positive(dt, "dt");
    if (n_search_uavs < 1 || n_ferry_uavs < 0 || query_count < 0) {
        throw InvalidConfig("need at least one search UAV and non-negative ferry/query counts");
    }
    if (!(query_region_ratio > 0.0 && query_region_ratio <= 1.0)) {
        throw InvalidConfig("query region ratio must be in (0, 1]");
    }
    if (zeta < 0.0 || delivery_window < 0.0) {
        throw InvalidConfig("zeta and delivery window must be non-negative");
    }
    if (query_time_period > sim_time) {
        throw InvalidConfig("query time period exceeds sim time");
    }
}

double Scenario::horizon() const {
    double h = 0.0;
    for (const auto& u : uavs) {
        h = std::max(h, u.end_time());
    }
    return h;
}

namespace {

/// Waypoints for repeatedly traversing a closed polyline at `speed`,
/// starting `offset` meters along it, over [0, horizon].
std::vector<Waypoint> loop_waypoints(const std::vector<Point>& loop, double speed, double offset, double horizon) {
    std::vector<double> cum{0.0};
    for (std::size_t i = 1; i < loop.size(); ++i) {
        cum.push_back(cum.back() + std::hypot(loop[i].x - loop[i - 1].x, loop[i].y - loop[i - 1].y));
    }
    const double length = cum.back();
    std::vector<Waypoint> out;
    if (length <= 0.0) {
        out.push_back({0.0, loop.front().x, loop.front().y});
        out.push_back({horizon, loop.front().x, loop.front().y});
        return out;
    }
    auto at = [&](double d) {
        d = std::fmod(d, length);
        auto it = std::upper_bound(cum.begin(), cum.end(), d);
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
        const double seg = cum[k] - cum[k - 1];
        const double s = seg > 0.0 ? (d - cum[k - 1]) / seg : 0.0;
        return Point{loop[k - 1].x + s * (loop[k].x - loop[k - 1].x), loop[k - 1].y + s * (loop[k].y - loop[k - 1].y)};
    };

    const Point p0 = at(offset);
    out.push_back({0.0, p0.x, p0.y});
    // Distances along the unrolled loop at which vertices are reached.
    const double start = std::fmod(offset, length);
    double lap = 0.0;
    while (true) {
        bool done = false;
        for (std::size_t k = 1; k < cum.size(); ++k) {
            const double d = lap + cum[k] - start;
            if (d <= 1e-9) {
                continue;
            }
            const double t = d / speed;
            if (t >= horizon) {
                done = true;
                break;
            }
            if (t - out.back().t > 1e-9) {
                out.push_back({t, loop[k].x, loop[k].y});
            }
        }
        if (done) {
            break;
        }
        lap += length;
    }
    const Point pe = at(offset + speed * horizon);
    if (horizon - out.back().t > 1e-9) {
        out.push_back({horizon, pe.x, pe.y});
    }
    return out;
}

/// Boustrophedon over one tile followed by the same sweep in reverse.
std::vector<Point> zigzag_loop(double x0, double y0, double tile, double spacing) {
    const int lanes = std::max(1, static_cast<int>(std::ceil(tile / spacing - 1e-9)));
    const double gap = tile / lanes;
    const double left = x0 + gap / 2.0;
    const double right = x0 + tile - gap / 2.0;
    std::vector<Point> sweep;
    for (int k = 0; k < lanes; ++k) {
        const double y = y0 + gap * (k + 0.5);
        if (k % 2 == 0) {
            sweep.push_back({left, y});
            sweep.push_back({right, y});
        } else {
            sweep.push_back({right, y});
            sweep.push_back({left, y});
        }
    }
    std::vector<Point> loop = sweep;
    for (auto it = sweep.rbegin() + 1; it != sweep.rend(); ++it) {
        loop.push_back(*it);
    }
    return loop;
}

/// Segment of the line through `c` at angle `theta` clipped to a rectangle.
std::pair<Point, Point> clip_line(Point c, double theta, double x0, double y0, double x1, double y1) {
    const double dx = std::cos(theta);
    const double dy = std::sin(theta);
    double lo = -1e18;
    double hi = 1e18;
    auto slab = [&](double p, double d, double a, double b) {
        if (std::abs(d) < 1e-12) {
            return;
        }
        double s0 = (a - p) / d;
        double s1 = (b - p) / d;
        if (s0 > s1) {
            std::swap(s0, s1);
        }
        lo = std::max(lo, s0);
        hi = std::min(hi, s1);
    };
    slab(c.x, dx, x0, x1);
    slab(c.y, dy, y0, y1);
    auto clamp = [&](Point p) {
        return Point{std::clamp(p.x, x0, x1), std::clamp(p.y, y0, y1)};
    };
    return {clamp({c.x + lo * dx, c.y + lo * dy}), clamp({c.x + hi * dx, c.y + hi * dy})};
}

}  // namespace

Scenario generate_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const int cols = static_cast<int>(std::floor(cfg.area_width / cfg.tile_size + 1e-9));
    const int rows = static_cast<int>(std::floor(cfg.area_height / cfg.tile_size + 1e-9));
    if (cols * rows < cfg.n_search_uavs) {
        throw InvalidConfig(fmt::format("area fits {} tiles of {} m but {} search UAVs were requested",
                                        std::max(cols * rows, 0), cfg.tile_size, cfg.n_search_uavs));
    }
    const double gx = (cfg.area_width - cols * cfg.tile_size) / 2.0;
    const double gy = (cfg.area_height - rows * cfg.tile_size) / 2.0;

    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<int> cells(static_cast<std::size_t>(cols * rows));
    std::iota(cells.begin(), cells.end(), 0);
    std::shuffle(cells.begin(), cells.end(), rng);
    cells.resize(static_cast<std::size_t>(cfg.n_search_uavs));
    std::sort(cells.begin(), cells.end());

    Scenario sc;
    sc.ground = {"g0", cfg.area_width / 2.0, cfg.area_height / 2.0};
    sc.comm_range = cfg.comm_range;
    sc.link_throughput = cfg.link_throughput;
    sc.packet_size = cfg.packet_size;
    const double horizon = cfg.horizon();
    const double spacing = std::min(cfg.lane_spacing, cfg.comm_range);

    int next_id = 1;
    for (int cell : cells) {
        const double x0 = gx + (cell % cols) * cfg.tile_size;
        const double y0 = gy + (cell / cols) * cfg.tile_size;
        auto loop = zigzag_loop(x0, y0, cfg.tile_size, spacing);
        double length = 0.0;
        for (std::size_t i = 1; i < loop.size(); ++i) {
            length += std::hypot(loop[i].x - loop[i - 1].x, loop[i].y - loop[i - 1].y);
        }
        const double offset = unit(rng) * length;
        sc.uavs.emplace_back(fmt::format("u{}", next_id++), loop_waypoints(loop, cfg.uav_speed, offset, horizon));
    }
    const double gx1 = gx + cols * cfg.tile_size;
    const double gy1 = gy + rows * cfg.tile_size;
    for (int f = 0; f < cfg.n_ferry_uavs; ++f) {
        const double theta = std::numbers::pi * f / cfg.n_ferry_uavs;
        auto [a, b] = clip_line({sc.ground.x, sc.ground.y}, theta, gx, gy, gx1, gy1);
        std::vector<Point> loop{a, b, a};
        const double length = 2.0 * std::hypot(b.x - a.x, b.y - a.y);
        const double offset = unit(rng) * length;
        sc.uavs.emplace_back(fmt::format("u{}", next_id++), loop_waypoints(loop, cfg.uav_speed, offset, horizon));
    }
    return sc;
}

Tcg scenario_tcg(const Scenario& scenario, double dt, ContactMode mode) {
    return build_tcg(scenario.uavs, scenario.ground,
                     TcgBuildOptions{scenario.comm_range, 0.0, scenario.horizon(), dt, mode});
}

const char* planner_name(Planner p) { return p == Planner::Esta ? "ESTA" : "BSTA"; }

void verify_transmissions(const Tcg& tcg, NodeId g0, std::span<const Transmission> sends,
                          std::span<const std::pair<NodeId, Micros>> generated, Micros deadline, Micros t_trans) {
    // (node, target) -> earliest time the target's result is present there.
    std::map<std::pair<NodeId, NodeId>, Micros> present;
    for (const auto& [s, t] : generated) {
        present[{s, s}] = t;
    }
    std::vector<const Transmission*> order;
    for (const auto& tx : sends) {
        order.push_back(&tx);
    }
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->send < b->send; });
    for (const Transmission* tx : order) {
        const bool fits = std::any_of(tcg.incident(tx->from).begin(), tcg.incident(tx->from).end(), [&](const auto& inc) {
            return inc.other == tx->to && inc.window.begin <= tx->send && forwardable(tx->send, inc.window, t_trans);
        });
        if (!fits || tx->arrive != tx->send + t_trans) {
            throw InternalConsistencyError(fmt::format("send {}->{} at {} violates its contact window",
                                                       tcg.name(tx->from), tcg.name(tx->to),
                                                       format_seconds(tx->send)));
        }
        for (NodeId s : tx->carries) {
            auto it = present.find({tx->from, s});
            if (it == present.end() || it->second > tx->send) {
                throw InternalConsistencyError(fmt::format("{} forwards {}'s result before holding it",
                                                           tcg.name(tx->from), tcg.name(s)));
            }
            auto [slot, inserted] = present.emplace(std::make_pair(tx->to, s), tx->arrive);
            if (!inserted) {
                slot->second = std::min(slot->second, tx->arrive);
            }
        }
    }
    for (const auto& [s, t] : generated) {
        auto it = present.find({g0, s});
        if (it == present.end() || it->second > deadline) {
            throw InternalConsistencyError(fmt::format("result of {} misses the ground station deadline",
                                                       tcg.name(s)));
        }
    }
}

QueryMetrics simulate_targets(const Tcg& tcg, NodeId g0, std::span<const NodeId> targets_in, Micros issue_time,
                              Planner planner, const SimOptions& options, TransmitParams params) {
    QueryMetrics m;
    m.planner = planner;
    std::vector<NodeId> targets(targets_in.begin(), targets_in.end());
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    m.n_targets = targets.size();
    if (targets.empty()) {
        m.delay = Micros::zero();
        return m;
    }

    std::map<NodeId, Micros> t_gen;
    if (options.distribute_requests) {
        const SpaTable requests = shortest_paths(tcg, g0, issue_time, params);
        for (NodeId s : targets) {
            if (!requests.reachable(s)) {
                return m;
            }
            t_gen[s] = requests.T(s);
            m.request_energy += requests.H(s) * options.energy.per_hop();
        }
    } else {
        for (NodeId s : targets) {
            t_gen[s] = issue_time;
        }
    }

    SpaTables tables;
    std::vector<std::pair<NodeId, Micros>> generated;
    for (NodeId s : targets) {
        auto& table = tables.emplace(s, shortest_paths(tcg, s, t_gen[s], params)).first->second;
        if (!table.reachable(g0)) {
            return m;
        }
        generated.emplace_back(s, t_gen[s]);
    }

    const auto paths = plan_bsta(tcg, g0, targets, tables, params);
    m.unaggregated_energy = independent_paths_energy(paths, options.energy);

    TransmissionPlan plan;
    Micros deadline;
    if (planner == Planner::Esta) {
        const auto tree = build_stat(tcg, g0, targets, tables, options.zeta, params);
        plan = schedule_tree(tree, tcg, tables, params);
        m.energy = plan_energy(tree, options.energy);
        m.fallback_count = tree.fallback_count();
        deadline = tree.t_nd;
    } else {
        auto replay = replay_bsta(tcg, g0, paths, params);
        plan = std::move(replay.plan);
        m.energy = static_cast<double>(replay.transmissions) * options.energy.per_hop();
        std::vector<SpaTable> flat;
        for (const auto& [s, t] : tables) {
            flat.push_back(t);
        }
        deadline = user_query_delay(tcg, flat, g0);
    }
    verify_transmissions(tcg, g0, plan.sends, generated, deadline, params.t_trans);
    m.transmissions = plan.sends.size();
    if (!plan.completion) {
        throw InternalConsistencyError("plan delivered nothing to the ground station");
    }
    m.delay = *plan.completion - issue_time;
    return m;
}

QueryMetrics simulate_query(const Scenario& scenario, const Tcg& tcg, const Query& query, Planner planner,
                            const SimOptions& options) {
    const auto names = determine_targets(scenario.uavs, query);
    std::vector<NodeId> targets;
    for (const auto& n : names) {
        targets.push_back(tcg.id(n));
    }
    return simulate_targets(tcg, tcg.id(scenario.ground.id), targets, Micros::from_seconds(query.issue_time), planner,
                            options, scenario.params());
}

std::vector<Query> generate_queries(const ScenarioConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double scale = std::sqrt(cfg.query_region_ratio);
    const double w = cfg.area_width * scale;
    const double h = cfg.area_height * scale;
    std::vector<Query> out;
    out.reserve(static_cast<std::size_t>(cfg.query_count));
    for (int q = 0; q < cfg.query_count; ++q) {
        const double ux = unit(rng);
        const double uy = unit(rng);
        const double ut = unit(rng);
        Query query;
        const double x0 = ux * (cfg.area_width - w);
        const double y0 = uy * (cfg.area_height - h);
        query.region = Region(x0, y0, x0 + w, y0 + h);
        query.t_start = ut * (cfg.sim_time - cfg.query_time_period);
        query.t_end = query.t_start + cfg.query_time_period;
        query.issue_time = query.t_end;
        out.push_back(query);
    }
    return out;
}

const char* sweep_var_name(SweepVar v) {
    switch (v) {
        case SweepVar::RegionRatio: return "region_ratio";
        case SweepVar::TimePeriod: return "time_period";
        case SweepVar::QueryCount: return "query_count";
        case SweepVar::UavSpeed: return "uav_speed";
        case SweepVar::CommRange: return "comm_range";
        case SweepVar::Zeta: return "zeta";
    }
    return "?";
}

SweepVar parse_sweep_var(const std::string& name) {
    for (auto v : {SweepVar::RegionRatio, SweepVar::TimePeriod, SweepVar::QueryCount, SweepVar::UavSpeed,
                   SweepVar::CommRange, SweepVar::Zeta}) {
        if (name == sweep_var_name(v)) {
            return v;
        }
    }
    throw InvalidArgument("unknown sweep variable '" + name +
                          "' (expected region_ratio, time_period, query_count, uav_speed, comm_range or zeta)");
}

ScenarioConfig apply_sweep(ScenarioConfig cfg, SweepVar var, double value) {
    switch (var) {
        case SweepVar::RegionRatio: cfg.query_region_ratio = value; break;
        case SweepVar::TimePeriod: cfg.query_time_period = value; break;
        case SweepVar::QueryCount: cfg.query_count = static_cast<int>(std::llround(value)); break;
        case SweepVar::UavSpeed: cfg.uav_speed = value; break;
        case SweepVar::CommRange: cfg.comm_range = value; break;
        case SweepVar::Zeta: cfg.zeta = value; break;
    }
    cfg.validate();
    return cfg;
}

namespace {

std::vector<QueryRecord> run_point(const ScenarioConfig& base, SweepVar var, double value,
                                   std::span<const Planner> planners, std::uint64_t seed) {
    ScenarioConfig cfg = apply_sweep(base, var, value);
    cfg.rng_seed = seed;
    const Scenario scenario = generate_scenario(cfg);
    const Tcg tcg = scenario_tcg(scenario, cfg.dt);
    const auto queries = generate_queries(cfg, seed);
    SimOptions options;
    options.zeta = Micros::from_seconds(cfg.zeta);
    options.energy.packet_bytes = cfg.packet_size;

    std::vector<QueryRecord> out;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        for (Planner p : planners) {
            auto m = simulate_query(scenario, tcg, queries[q], p, options);
            m.query_id = q;
            out.push_back({var, value, seed, m});
        }
    }
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ScenarioConfig& base, const Sweep& sweep, std::span<const Planner> planners,
                                std::span<const std::uint64_t> seeds) {
    ExperimentResult result{sweep, base, {seeds.begin(), seeds.end()}, {}, {}};
    std::vector<std::future<std::vector<QueryRecord>>> jobs;
    for (double value : sweep.values) {
        for (std::uint64_t seed : seeds) {
            jobs.push_back(std::async(std::launch::async, run_point, std::cref(base), sweep.var, value, planners, seed));
        }
    }
    std::size_t job = 0;
    for (double value : sweep.values) {
        SweepPoint point{value, {}, std::nullopt};
        for (Planner p : planners) {
            point.planners.push_back({p});
        }
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            auto records = jobs[job++].get();
            for (const auto& r : records) {
                auto& s = *std::find_if(point.planners.begin(), point.planners.end(),
                                        [&](const PlannerSummary& x) { return x.planner == r.metrics.planner; });
                if (r.metrics.feasible()) {
                    ++s.feasible;
                    s.mean_delay_s += r.metrics.delay->seconds();
                    s.mean_energy += r.metrics.energy;
                    s.mean_request_energy += r.metrics.request_energy;
                    s.fallback_total += r.metrics.fallback_count;
                } else {
                    ++s.infeasible;
                }
            }
            result.records.insert(result.records.end(), records.begin(), records.end());
        }
        std::optional<double> esta;
        std::optional<double> bsta;
        for (auto& s : point.planners) {
            if (s.feasible > 0) {
                s.mean_delay_s /= static_cast<double>(s.feasible);
                s.mean_energy /= static_cast<double>(s.feasible);
                s.mean_request_energy /= static_cast<double>(s.feasible);
            }
            (s.planner == Planner::Esta ? esta : bsta) = s.mean_energy;
        }
        if (esta && bsta && *bsta > 0.0) {
            point.energy_ratio = *esta / *bsta;
        }
        result.points.push_back(std::move(point));
    }
    return result;
}

void write_results_csv(std::ostream& os, const ExperimentResult& result) {
    os << "planner,sweep_var,sweep_value,seed,query_id,n_targets,delay_s,energy_units,request_energy_units,"
          "fallback_count\n";
    for (const auto& r : result.records) {
        const auto& m = r.metrics;
        fmt::print(os, "{},{},{},{},{},{},{},{},{},{}\n", planner_name(m.planner), sweep_var_name(r.var), r.value,
                   r.seed, m.query_id, m.n_targets, m.delay ? format_seconds(*m.delay) : std::string("inf"),
                   m.energy, m.request_energy, m.fallback_count);
    }
}

}  // namespace esta
