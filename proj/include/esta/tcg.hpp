#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "esta/node.hpp"
#include "esta/time.hpp"
#include "esta/trajectory.hpp"

namespace esta {

struct ContactWindow {
    Micros begin;
    Micros end;

    friend bool operator==(const ContactWindow&, const ContactWindow&) = default;
};

/// Communication window <a, b, t_begin, t_end>; undirected.
struct TcgEdge {
    NodeId a;
    NodeId b;
    Micros t_begin;
    Micros t_end;
};

/// Topology change graph: named nodes plus timed, undirected contact
/// windows. Several windows per pair are allowed as long as they are
/// pairwise disjoint. Immutable after construction.
class Tcg {
public:
    struct Incident {
        NodeId other;
        ContactWindow window;
    };

    Tcg(std::vector<std::string> node_names, std::vector<TcgEdge> edges,
        std::optional<NodeId> ground_station = std::nullopt);

    std::size_t node_count() const { return names_.size(); }
    const std::string& name(NodeId id) const { return names_.at(id.value); }
    std::span<const std::string> names() const { return names_; }
    std::optional<NodeId> find(std::string_view name) const;
    /// Throws InvalidArgument for unknown names.
    NodeId id(std::string_view name) const;

    std::span<const TcgEdge> edges() const { return edges_; }
    /// Incident windows of `n`, ordered by (other, begin).
    std::span<const Incident> incident(NodeId n) const { return adjacency_.at(n.value); }
    /// Distinct neighbors of `n` in id order.
    std::vector<NodeId> neighbors(NodeId n) const;
    std::optional<NodeId> ground_station() const { return ground_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, NodeId> index_;
    std::vector<TcgEdge> edges_;
    std::vector<std::vector<Incident>> adjacency_;
    std::optional<NodeId> ground_;
};

/// All windows between a and b sorted by begin; empty for a == b or no contact.
std::vector<ContactWindow> edge_window(const Tcg& tcg, NodeId a, NodeId b);

enum class ContactMode {
    Intervals,  // one edge per maximal in-range run
    Hull,       // one edge [first begin, last end] per pair
};

struct GroundStation {
    std::string id = "g0";
    double x = 0.0;
    double y = 0.0;
};

struct TcgBuildOptions {
    double comm_range = 200.0;  // meters
    double t0 = 0.0;            // seconds
    double t1 = 0.0;
    double dt = 0.1;
    ContactMode mode = ContactMode::Intervals;
};

/// Samples every pair's distance at t0, t0 + dt, ... up to t1 and turns
/// maximal runs of samples within range into contact windows. Runs that
/// consist of a single sample have zero length and are dropped. Node order is
/// the trajectories in input order followed by the ground station.
Tcg build_tcg(std::span<const Trajectory> trajs, const GroundStation& ground, const TcgBuildOptions& options);

}  // namespace esta
