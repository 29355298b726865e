#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "esta/energy.hpp"
#include "esta/planner_stat.hpp"
#include "esta/spa.hpp"
#include "esta/tcg.hpp"
#include "esta/trajectory.hpp"

namespace esta {

/// Forest-monitoring scenario parameters. Defaults follow the reference
/// setup: 1200 x 1300 m, 21 search + 4 ferry UAVs at 10 m/s, 200 m range,
/// 10 KB packets over 125 KB/s links, 30 s query periods over 10% of the area.
struct ScenarioConfig {
    double area_width = 1200.0;
    double area_height = 1300.0;
    int n_search_uavs = 21;
    int n_ferry_uavs = 4;
    double uav_speed = 10.0;
    double comm_range = 200.0;
    double packet_size = 10'000.0;       // bytes
    double link_throughput = 125'000.0;  // bytes per second
    double sim_time = 1000.0;
    double query_time_period = 30.0;
    double query_region_ratio = 0.1;
    int query_count = 1000;
    double zeta = 0.0;
    std::uint64_t rng_seed = 1;

    double tile_size = 200.0;
    double lane_spacing = 50.0;
    /// Extra flight time after sim_time during which results may still travel.
    double delivery_window = 1000.0;
    double dt = 0.1;

    double horizon() const { return sim_time + delivery_window; }
    void validate() const;
};

struct Scenario {
    std::vector<Trajectory> uavs;
    GroundStation ground;
    double comm_range = 200.0;
    double link_throughput = 125'000.0;
    double packet_size = 10'000.0;

    TransmitParams params() const { return TransmitParams::from_link(packet_size, link_throughput); }
    /// Latest waypoint time across all UAVs.
    double horizon() const;
};

/// Search UAVs each sweep one tile of the grid boustrophedon-style, forth and
/// back; ferries shuttle along straight lines through the ground station at
/// the area centre. Tile choice and start phases come from cfg.rng_seed.
/// Throws InvalidConfig when the grid has fewer tiles than search UAVs.
Scenario generate_scenario(const ScenarioConfig& cfg);

Tcg scenario_tcg(const Scenario& scenario, double dt = 0.1, ContactMode mode = ContactMode::Intervals);

enum class Planner { Esta, Bsta };
const char* planner_name(Planner p);

struct SimOptions {
    Micros zeta = Micros::zero();
    EnergyModel energy;
    /// When false every target generates its result at the issue time
    /// (request distribution skipped, e.g. for a hand-written TCG).
    bool distribute_requests = true;
};

struct QueryMetrics {
    std::size_t query_id = 0;
    Planner planner = Planner::Esta;
    std::size_t n_targets = 0;
    std::optional<Micros> delay;  // nullopt: some target never reaches g0
    double energy = 0.0;
    double request_energy = 0.0;
    double unaggregated_energy = 0.0;
    std::size_t fallback_count = 0;
    std::size_t transmissions = 0;

    bool feasible() const { return delay.has_value(); }
};

/// Independent replay check: every send must fit a contact window
/// (max(t_rx, begin) + t_trans <= end), every carried result must already be at the sender, and every
/// target's result must reach g0 by `deadline`. Throws InternalConsistencyError.
void verify_transmissions(const Tcg& tcg, NodeId g0, std::span<const Transmission> sends,
                          std::span<const std::pair<NodeId, Micros>> generated, Micros deadline, Micros t_trans);

/// Request distribution, planning, replay and accounting for a known
/// target set. Request arrival times come from an earliest-delivery search
/// out of g0 starting at `issue_time`.
QueryMetrics simulate_targets(const Tcg& tcg, NodeId g0, std::span<const NodeId> targets, Micros issue_time,
                              Planner planner, const SimOptions& options, TransmitParams params);

/// Target determination on the scenario's trajectories, then simulate_targets.
QueryMetrics simulate_query(const Scenario& scenario, const Tcg& tcg, const Query& query, Planner planner,
                            const SimOptions& options);

/// Random queries: regions with the area's aspect ratio covering
/// query_region_ratio of it, placed uniformly; periods start uniformly in
/// [0, sim_time - period] and are issued at the end of their period.
std::vector<Query> generate_queries(const ScenarioConfig& cfg, std::uint64_t seed);

enum class SweepVar { RegionRatio, TimePeriod, QueryCount, UavSpeed, CommRange, Zeta };
const char* sweep_var_name(SweepVar v);
/// Throws InvalidArgument for unknown names.
SweepVar parse_sweep_var(const std::string& name);
/// Copy of `cfg` with the swept field set to `value`.
ScenarioConfig apply_sweep(ScenarioConfig cfg, SweepVar var, double value);

struct Sweep {
    SweepVar var = SweepVar::Zeta;
    std::vector<double> values;
};

struct QueryRecord {
    SweepVar var;
    double value;
    std::uint64_t seed;
    QueryMetrics metrics;
};

struct PlannerSummary {
    Planner planner;
    std::size_t feasible = 0;
    std::size_t infeasible = 0;
    double mean_delay_s = 0.0;
    double mean_energy = 0.0;
    double mean_request_energy = 0.0;
    std::size_t fallback_total = 0;
};

struct SweepPoint {
    double value;
    std::vector<PlannerSummary> planners;
    std::optional<double> energy_ratio;  // mean ESTA energy / mean BSTA energy
};

struct ExperimentResult {
    Sweep sweep;
    ScenarioConfig base;
    std::vector<std::uint64_t> seeds;
    std::vector<QueryRecord> records;  // value-major, then seed, query, planner
    std::vector<SweepPoint> points;
};

/// For each sweep value and seed: generate the scenario and query_count
/// queries, simulate each with every planner. Values run concurrently; the
/// output order is fixed. Means use feasible queries only.
ExperimentResult run_experiment(const ScenarioConfig& base, const Sweep& sweep, std::span<const Planner> planners,
                                std::span<const std::uint64_t> seeds);

/// Header: planner,sweep_var,sweep_value,seed,query_id,n_targets,delay_s,
/// energy_units,request_energy_units,fallback_count
void write_results_csv(std::ostream& os, const ExperimentResult& result);

}  // namespace esta
