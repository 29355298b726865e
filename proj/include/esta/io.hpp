#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "esta/planner_bsta.hpp"
#include "esta/planner_stat.hpp"
#include "esta/simkit.hpp"
#include "esta/spa.hpp"
#include "esta/tcg.hpp"

namespace esta::io {

using nlohmann::json;

/// Seconds as a number; the unreachable sentinel as the string "inf".
json time_to_json(Micros t);
Micros time_from_json(const json& j);

// stat-tcg/1: {schema, nodes, edges:[{a,b,t_begin,t_end}], ground_station?}
json tcg_to_json(const Tcg& tcg);
Tcg tcg_from_json(const json& j);

// stat-scenario/1
json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const json& j);

// stat-spa/1
json spa_to_json(const Tcg& tcg, const SpaTable& table);

// stat-tree/1: nested {node, deadline, targets, children}
json tree_to_json(const Tcg& tcg, const AggregationTree& tree);
/// BSTA paths as chains hanging off the ground station; a node's deadline
/// is the time the packet reaches it.
json bsta_to_json(const Tcg& tcg, NodeId g0, std::span<const PathPlan> plans);

/// Parsed stat-tree/1 node.
struct TreeDoc {
    std::string node;
    Micros deadline;
    std::vector<std::string> targets;
    std::vector<TreeDoc> children;
};
TreeDoc tree_from_json(const json& j);

json config_to_json(const ScenarioConfig& cfg);

// stat-summary/1: per sweep value, per-planner means and the ESTA/BSTA energy ratio.
json summary_to_json(const ExperimentResult& result);

/// Throws InvalidArgument when the file cannot be read or parsed.
json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

/// Loads either schema from disk.
Tcg load_tcg(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace esta::io
