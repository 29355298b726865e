#include "esta/tcg.hpp"

#include <algorithm>
#include <cmath>

#include "esta/errors.hpp"

namespace esta {

Tcg::Tcg(std::vector<std::string> node_names, std::vector<TcgEdge> edges, std::optional<NodeId> ground_station)
    : names_(std::move(node_names)), edges_(std::move(edges)), ground_(ground_station) {
    for (std::uint32_t i = 0; i < names_.size(); ++i) {
        if (!index_.emplace(names_[i], NodeId{i}).second) {
            throw InvalidArgument("duplicate node id '" + names_[i] + "'");
        }
    }
    if (ground_ && ground_->value >= names_.size()) {
        throw InvalidArgument("ground station index out of range");
    }
    adjacency_.resize(names_.size());
    for (const auto& e : edges_) {
        if (e.a.value >= names_.size() || e.b.value >= names_.size()) {
            throw InvalidArgument("edge endpoint is not a node");
        }
        if (e.a == e.b) {
            throw InvalidArgument("self edge on '" + names_[e.a.value] + "'");
        }
        if (!(e.t_begin < e.t_end)) {
            throw InvalidArgument("edge " + names_[e.a.value] + "-" + names_[e.b.value] +
                                  " needs t_begin < t_end");
        }
        adjacency_[e.a.value].push_back({e.b, {e.t_begin, e.t_end}});
        adjacency_[e.b.value].push_back({e.a, {e.t_begin, e.t_end}});
    }
    for (std::size_t n = 0; n < adjacency_.size(); ++n) {
        auto& list = adjacency_[n];
        std::sort(list.begin(), list.end(), [](const Incident& x, const Incident& y) {
            return x.other != y.other ? x.other < y.other : x.window.begin < y.window.begin;
        });
        for (std::size_t k = 1; k < list.size(); ++k) {
            if (list[k].other == list[k - 1].other && !(list[k - 1].window.end < list[k].window.begin)) {
                throw InvalidArgument("overlapping windows between '" + names_[n] + "' and '" +
                                      names_[list[k].other.value] + "'");
            }
        }
    }
}

std::optional<NodeId> Tcg::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

NodeId Tcg::id(std::string_view name) const {
    if (auto found = find(name)) {
        return *found;
    }
    throw InvalidArgument("unknown node '" + std::string(name) + "'");
}

std::vector<NodeId> Tcg::neighbors(NodeId n) const {
    std::vector<NodeId> out;
    for (const auto& inc : incident(n)) {
        if (out.empty() || out.back() != inc.other) {
            out.push_back(inc.other);
        }
    }
    return out;
}

std::vector<ContactWindow> edge_window(const Tcg& tcg, NodeId a, NodeId b) {
    std::vector<ContactWindow> out;
    if (a == b || a.value >= tcg.node_count() || b.value >= tcg.node_count()) {
        return out;
    }
    for (const auto& inc : tcg.incident(a)) {
        if (inc.other == b) {
            out.push_back(inc.window);
        }
    }
    return out;
}

Tcg build_tcg(std::span<const Trajectory> trajs, const GroundStation& ground, const TcgBuildOptions& options) {
    if (!(options.dt > 0.0)) {
        throw InvalidArgument("dt must be positive");
    }
    if (!(options.t0 < options.t1)) {
        throw InvalidArgument("horizon needs t0 < t1");
    }
    if (!(options.comm_range > 0.0)) {
        throw InvalidArgument("comm_range must be positive");
    }

    std::vector<std::string> names;
    names.reserve(trajs.size() + 1);
    for (const auto& t : trajs) {
        names.push_back(t.uav_id());
    }
    names.push_back(ground.id);
    const std::size_t n = names.size();
    const NodeId ground_id{static_cast<std::uint32_t>(n - 1)};

    const Micros t0 = Micros::from_seconds(options.t0);
    const Micros t1 = Micros::from_seconds(options.t1);
    const Micros step = Micros::from_seconds(options.dt);
    if (step.count() <= 0) {
        throw InvalidArgument("dt is below one microsecond");
    }
    const double range_sq = options.comm_range * options.comm_range;

    // run_start[i*n+j] holds the first sample time of the current in-range run.
    std::vector<std::optional<Micros>> run_start(n * n);
    std::vector<Micros> last_in(n * n);
    std::vector<std::vector<ContactWindow>> runs(n * n);
    std::vector<Point> pos(n);

    auto close_run = [&](std::size_t k) {
        if (run_start[k] && *run_start[k] < last_in[k]) {
            runs[k].push_back({*run_start[k], last_in[k]});
        }
        run_start[k].reset();
    };

    for (Micros t = t0;; t += step) {
        if (t > t1) {
            t = t1;
        }
        const double ts = t.seconds();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            pos[i] = trajs[i].position_at(ts);
        }
        pos[n - 1] = {ground.x, ground.y};
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = pos[i].x - pos[j].x;
                const double dy = pos[i].y - pos[j].y;
                const std::size_t k = i * n + j;
                if (dx * dx + dy * dy <= range_sq) {
                    if (!run_start[k]) {
                        run_start[k] = t;
                    }
                    last_in[k] = t;
                } else if (run_start[k]) {
                    close_run(k);
                }
            }
        }
        if (t == t1) {
            break;
        }
    }

    std::vector<TcgEdge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::size_t k = i * n + j;
            close_run(k);
            const auto& r = runs[k];
            if (r.empty()) {
                continue;
            }
            const NodeId a{static_cast<std::uint32_t>(i)};
            const NodeId b{static_cast<std::uint32_t>(j)};
            if (options.mode == ContactMode::Hull) {
                edges.push_back({a, b, r.front().begin, r.back().end});
            } else {
                for (const auto& w : r) {
                    edges.push_back({a, b, w.begin, w.end});
                }
            }
        }
    }
    return Tcg(std::move(names), std::move(edges), ground_id);
}

}  // namespace esta
