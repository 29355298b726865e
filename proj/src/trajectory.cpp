#include "esta/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "esta/errors.hpp"

namespace esta {

Trajectory::Trajectory(std::string uav_id, std::vector<Waypoint> waypoints)
    : uav_id_(std::move(uav_id)), waypoints_(std::move(waypoints)) {
    if (waypoints_.empty()) {
        throw InvalidArgument("trajectory '" + uav_id_ + "' has no waypoints");
    }
    for (std::size_t i = 0; i < waypoints_.size(); ++i) {
        const auto& w = waypoints_[i];
        if (!std::isfinite(w.t) || !std::isfinite(w.x) || !std::isfinite(w.y)) {
            throw InvalidArgument("trajectory '" + uav_id_ + "' has a non-finite waypoint");
        }
        if (i > 0 && !(waypoints_[i - 1].t < w.t)) {
            throw InvalidArgument("trajectory '" + uav_id_ + "' waypoint times must be strictly increasing");
        }
    }
}

Point Trajectory::position_at(double t) const {
    if (t <= waypoints_.front().t) {
        return {waypoints_.front().x, waypoints_.front().y};
    }
    if (t >= waypoints_.back().t) {
        return {waypoints_.back().x, waypoints_.back().y};
    }
    auto hi = std::upper_bound(waypoints_.begin(), waypoints_.end(), t,
                               [](double value, const Waypoint& w) { return value < w.t; });
    const Waypoint& b = *hi;
    const Waypoint& a = *(hi - 1);
    const double s = (t - a.t) / (b.t - a.t);
    return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
}

Region::Region(double x_min_, double y_min_, double x_max_, double y_max_)
    : x_min(x_min_), y_min(y_min_), x_max(x_max_), y_max(y_max_) {
    if (!(x_min < x_max) || !(y_min < y_max)) {
        throw InvalidArgument("region must satisfy x_min < x_max and y_min < y_max");
    }
}

bool Region::contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
}

Point position_at(const Trajectory& traj, double t) { return traj.position_at(t); }

std::vector<Point> discretize(const Trajectory& traj, double t_start, double t_end, std::size_t n) {
    if (n < 2) {
        throw InvalidArgument("discretize needs n >= 2");
    }
    if (!(t_start < t_end)) {
        throw InvalidArgument("discretize needs t_start < t_end");
    }
    std::vector<Point> points;
    points.reserve(n);
    const double step = (t_end - t_start) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = (j + 1 == n) ? t_end : t_start + step * static_cast<double>(j);
        points.push_back(traj.position_at(t));
    }
    return points;
}

std::size_t default_sample_count(const Query& query) {
    return static_cast<std::size_t>(std::ceil(query.t_end - query.t_start)) + 1;
}

bool segment_intersects(Point a, Point b, const Region& r) {
    // Parametric clip of a + u (b - a), u in [0, 1], against the four slabs.
    double u0 = 0.0;
    double u1 = 1.0;
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.x - r.x_min, r.x_max - a.x, a.y - r.y_min, r.y_max - a.y};
    for (int k = 0; k < 4; ++k) {
        if (p[k] == 0.0) {
            if (q[k] < 0.0) {
                return false;
            }
            continue;
        }
        const double u = q[k] / p[k];
        if (p[k] < 0.0) {
            u0 = std::max(u0, u);
        } else {
            u1 = std::min(u1, u);
        }
        if (u0 > u1) {
            return false;
        }
    }
    return true;
}

std::vector<std::string> determine_targets(std::span<const Trajectory> trajs, const Query& query,
                                           std::optional<std::size_t> n) {
    const std::size_t samples = n.value_or(default_sample_count(query));
    std::vector<std::string> targets;
    for (const auto& traj : trajs) {
        const auto points = discretize(traj, query.t_start, query.t_end, samples);
        for (std::size_t j = 0; j + 1 < points.size(); ++j) {
            if (segment_intersects(points[j], points[j + 1], query.region)) {
                targets.push_back(traj.uav_id());
                break;
            }
        }
    }
    return targets;
}

}  // namespace esta
