#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace esta {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Waypoint {
    double t = 0.0;  // seconds
    double x = 0.0;
    double y = 0.0;
};

/// Pre-planned flight path of one UAV. Position is piecewise-linear in time
/// and clamps to the first/last waypoint outside the planned span.
class Trajectory {
public:
    Trajectory(std::string uav_id, std::vector<Waypoint> waypoints);

    const std::string& uav_id() const { return uav_id_; }
    std::span<const Waypoint> waypoints() const { return waypoints_; }
    double start_time() const { return waypoints_.front().t; }
    double end_time() const { return waypoints_.back().t; }

    Point position_at(double t) const;

private:
    std::string uav_id_;
    std::vector<Waypoint> waypoints_;
};

/// Axis-aligned query region; boundary points belong to the region.
struct Region {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    Region() = default;
    Region(double x_min, double y_min, double x_max, double y_max);

    bool contains(Point p) const;
    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
};

enum class AggregationOp { Max, Min, Sum, Count, Avg };

struct Query {
    double t_start = 0.0;
    double t_end = 0.0;
    Region region;
    std::string data_type = "TEMP";
    AggregationOp op = AggregationOp::Max;
    double issue_time = 0.0;
};

Point position_at(const Trajectory& traj, double t);

/// `n` positions at evenly spaced times spanning [t_start, t_end].
std::vector<Point> discretize(const Trajectory& traj, double t_start, double t_end, std::size_t n);

/// ceil((t_end - t_start) / 1 s) + 1, i.e. at most one second between samples.
std::size_t default_sample_count(const Query& query);

/// Inclusive segment/rectangle intersection test (Liang-Barsky clipping).
bool segment_intersects(Point a, Point b, const Region& region);

/// UAVs with at least one sampled trajectory segment touching the region
/// during the query period, in input order. `n` defaults to
/// default_sample_count(query).
std::vector<std::string> determine_targets(std::span<const Trajectory> trajs, const Query& query,
                                           std::optional<std::size_t> n = std::nullopt);

}  // namespace esta
