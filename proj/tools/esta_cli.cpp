// esta: plan, simulate and sweep spatial-temporal aggregation queries.
#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "esta/errors.hpp"
#include "esta/io.hpp"
#include "esta/planner_bsta.hpp"
#include "esta/planner_stat.hpp"
#include "esta/simkit.hpp"

namespace {

using namespace esta;

constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInternal = 4;

void add_config_flags(CLI::App& cmd, ScenarioConfig& cfg) {
    cmd.add_option("--area-width", cfg.area_width, "area width (m)")->capture_default_str();
    cmd.add_option("--area-height", cfg.area_height, "area height (m)")->capture_default_str();
    cmd.add_option("--n-search-uavs", cfg.n_search_uavs)->capture_default_str();
    cmd.add_option("--n-ferry-uavs", cfg.n_ferry_uavs)->capture_default_str();
    cmd.add_option("--uav-speed", cfg.uav_speed, "m/s")->capture_default_str();
    cmd.add_option("--comm-range", cfg.comm_range, "m")->capture_default_str();
    cmd.add_option("--packet-size", cfg.packet_size, "bytes")->capture_default_str();
    cmd.add_option("--link-throughput", cfg.link_throughput, "bytes/s")->capture_default_str();
    cmd.add_option("--sim-time", cfg.sim_time, "s")->capture_default_str();
    cmd.add_option("--query-time-period", cfg.query_time_period, "s")->capture_default_str();
    cmd.add_option("--query-region-ratio", cfg.query_region_ratio)->capture_default_str();
    cmd.add_option("--query-count,--queries", cfg.query_count)->capture_default_str();
    cmd.add_option("--zeta", cfg.zeta, "slack (s)")->capture_default_str();
    cmd.add_option("--rng-seed,--seed", cfg.rng_seed)->capture_default_str();
    cmd.add_option("--tile-size", cfg.tile_size, "m")->capture_default_str();
    cmd.add_option("--lane-spacing", cfg.lane_spacing, "m")->capture_default_str();
    cmd.add_option("--delivery-window", cfg.delivery_window, "s")->capture_default_str();
    cmd.add_option("--dt", cfg.dt, "contact sampling step (s)")->capture_default_str();
}

void print_config(const ScenarioConfig& cfg) { fmt::print("# config {}\n", io::config_to_json(cfg).dump()); }

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

std::vector<NodeId> resolve(const Tcg& tcg, const std::vector<std::string>& names) {
    std::vector<NodeId> out;
    for (const auto& n : names) {
        out.push_back(tcg.id(n));
    }
    return out;
}

ContactMode parse_mode(const std::string& s) {
    if (s == "intervals") return ContactMode::Intervals;
    if (s == "hull") return ContactMode::Hull;
    throw InvalidArgument("contact mode must be 'intervals' or 'hull'");
}

void print_tree(const Tcg& tcg, const AggregationTree& tree, std::size_t i, int depth) {
    const auto& n = tree.nodes[i];
    fmt::print("{:{}}{} deadline={}{}\n", "", depth * 2, tcg.name(n.id), format_seconds(n.deadline),
               n.grafted ? " (grafted)" : "");
    for (std::size_t c : n.children) {
        print_tree(tcg, tree, c, depth + 1);
    }
}

struct Input {
    std::string tcg_path;
    std::string scenario_path;
    std::string contact_mode = "intervals";
};

Tcg load_input(const Input& in, const ScenarioConfig& cfg, std::optional<Scenario>* scenario_out = nullptr) {
    if (!in.tcg_path.empty()) {
        return io::load_tcg(in.tcg_path);
    }
    Scenario sc = in.scenario_path.empty() ? generate_scenario(cfg) : io::load_scenario(in.scenario_path);
    Tcg tcg = scenario_tcg(sc, cfg.dt, parse_mode(in.contact_mode));
    if (scenario_out) {
        *scenario_out = std::move(sc);
    }
    return tcg;
}

NodeId ground_of(const Tcg& tcg, const std::string& name) {
    if (!name.empty()) {
        return tcg.id(name);
    }
    if (auto g = tcg.ground_station()) {
        return *g;
    }
    return tcg.id("g0");
}

int cmd_plan(const Input& in, const ScenarioConfig& cfg, const std::string& targets_arg, const std::string& ground,
             double t_gen, const std::string& planner, const std::string& out, const std::string& spa_out) {
    print_config(cfg);
    const Tcg tcg = load_input(in, cfg);
    const NodeId g0 = ground_of(tcg, ground);
    const auto targets = resolve(tcg, split(targets_arg));
    const TransmitParams params = in.tcg_path.empty()
                                      ? TransmitParams::from_link(cfg.packet_size, cfg.link_throughput)
                                      : TransmitParams{};
    std::map<NodeId, Micros> gen;
    for (NodeId s : targets) {
        gen[s] = Micros::from_seconds(t_gen);
    }
    SpaTables tables;
    for (auto [s, t] : gen) {
        tables.emplace(s, shortest_paths(tcg, s, t, params));
    }
    if (!spa_out.empty()) {
        io::json doc = io::json::array();
        for (const auto& [s, t] : tables) {
            doc.push_back(io::spa_to_json(tcg, t));
        }
        io::write_json(spa_out, doc);
    }
    fmt::print("t_trans {}\n", format_seconds(params.t_trans));
    if (planner == "esta" || planner == "both") {
        const auto tree = build_stat(tcg, g0, targets, tables, Micros::from_seconds(cfg.zeta), params);
        schedule_tree(tree, tcg, tables, params);
        fmt::print("ESTA\nt_d {}\nt_nd {}\n", format_seconds(tree.t_d), format_seconds(tree.t_nd));
        if (!tree.nodes.empty()) {
            print_tree(tcg, tree, 0, 1);
        }
        for (const auto& p : tree.independent) {
            std::vector<std::string> names;
            for (NodeId v : p.path) names.push_back(tcg.name(v));
            fmt::print("  independent {}: {}\n", tcg.name(p.target), fmt::join(names, " -> "));
        }
        fmt::print("fallback_count {}\nenergy {}\n", tree.fallback_count(), plan_energy(tree));
        if (!out.empty()) {
            io::write_json(out, io::tree_to_json(tcg, tree));
        }
    }
    if (planner == "bsta" || planner == "both") {
        const auto paths = plan_bsta(tcg, g0, targets, tables, params);
        const auto replay = replay_bsta(tcg, g0, paths, params);
        fmt::print("BSTA\n");
        for (const auto& p : paths) {
            std::string line = tcg.name(p.target);
            for (const auto& h : p.hops) {
                line += fmt::format(" -[{}]-> {}", format_seconds(h.send), tcg.name(h.to));
            }
            fmt::print("  {}\n", line);
        }
        fmt::print("t_d {}\nenergy {}\nunaggregated_energy {}\n",
                   format_seconds(replay.plan.completion.value_or(Micros::zero())),
                   static_cast<double>(replay.transmissions), independent_paths_energy(paths));
        if (!out.empty() && planner == "bsta") {
            io::write_json(out, io::bsta_to_json(tcg, g0, paths));
        }
    }
    return 0;
}

void print_metrics(const QueryMetrics& m) {
    fmt::print("{} query={} targets={} delay={} energy={} request_energy={} fallback={}\n", planner_name(m.planner),
               m.query_id, m.n_targets, m.delay ? format_seconds(*m.delay) : "inf", m.energy, m.request_energy,
               m.fallback_count);
}

int cmd_simulate(const Input& in, const ScenarioConfig& cfg, const std::string& targets_arg,
                 const std::string& ground, double issue_time, const std::string& out) {
    print_config(cfg);
    const Planner planners[] = {Planner::Esta, Planner::Bsta};
    SimOptions options;
    options.zeta = Micros::from_seconds(cfg.zeta);
    options.energy.packet_bytes = cfg.packet_size;
    if (!in.tcg_path.empty()) {
        const Tcg tcg = io::load_tcg(in.tcg_path);
        const auto targets = resolve(tcg, split(targets_arg));
        options.distribute_requests = false;
        bool infeasible = false;
        for (Planner p : planners) {
            auto m = simulate_targets(tcg, ground_of(tcg, ground), targets, Micros::from_seconds(issue_time), p,
                                      options, TransmitParams{});
            print_metrics(m);
            infeasible |= !m.feasible();
        }
        return infeasible ? kExitInfeasible : 0;
    }
    std::optional<Scenario> scenario;
    const Tcg tcg = load_input(in, cfg, &scenario);
    ExperimentResult result{{SweepVar::Zeta, {cfg.zeta}}, cfg, {cfg.rng_seed}, {}, {}};
    const auto queries = generate_queries(cfg, cfg.rng_seed);
    for (std::size_t q = 0; q < queries.size(); ++q) {
        for (Planner p : planners) {
            auto m = simulate_query(*scenario, tcg, queries[q], p, options);
            m.query_id = q;
            print_metrics(m);
            result.records.push_back({SweepVar::Zeta, cfg.zeta, cfg.rng_seed, m});
        }
    }
    if (!out.empty()) {
        std::ofstream f(out);
        write_results_csv(f, result);
    }
    return 0;
}

int cmd_sweep(const ScenarioConfig& cfg, const std::string& var, const std::string& values, int n_seeds,
              const std::string& out, const std::string& summary) {
    print_config(cfg);
    Sweep sweep;
    sweep.var = parse_sweep_var(var);
    for (const auto& v : split(values)) {
        try {
            sweep.values.push_back(std::stod(v));
        } catch (const std::exception&) {
            throw InvalidArgument("bad sweep value '" + v + "'");
        }
    }
    if (sweep.values.empty()) {
        throw InvalidArgument("--values needs at least one number");
    }
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < n_seeds; ++k) {
        seeds.push_back(cfg.rng_seed + static_cast<std::uint64_t>(k));
    }
    const Planner planners[] = {Planner::Esta, Planner::Bsta};
    const auto result = run_experiment(cfg, sweep, planners, seeds);
    for (const auto& p : result.points) {
        for (const auto& s : p.planners) {
            fmt::print("{}={} {} mean_delay_s={:.6f} mean_energy={:.4f} feasible={} infeasible={}\n", var, p.value,
                       planner_name(s.planner), s.mean_delay_s, s.mean_energy, s.feasible, s.infeasible);
        }
        if (p.energy_ratio) {
            fmt::print("{}={} energy_ratio={:.4f}\n", var, p.value, *p.energy_ratio);
        }
    }
    if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw InvalidArgument("cannot write " + out);
        write_results_csv(f, result);
    }
    if (!summary.empty()) {
        io::write_json(summary, io::summary_to_json(result));
    }
    return 0;
}

int cmd_export_tcg(const Input& in, const ScenarioConfig& cfg, const std::string& out,
                   const std::string& scenario_out) {
    print_config(cfg);
    std::optional<Scenario> scenario;
    const Tcg tcg = load_input(in, cfg, &scenario);
    fmt::print("nodes {} edges {}\n", tcg.node_count(), tcg.edges().size());
    if (!out.empty()) {
        io::write_json(out, io::tcg_to_json(tcg));
    }
    if (!scenario_out.empty() && scenario) {
        io::write_json(scenario_out, io::scenario_to_json(*scenario));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial-temporal range aggregation queries over UAV contact graphs"};
    app.require_subcommand(1);

    ScenarioConfig cfg;
    Input in;
    std::string targets, ground, planner = "esta", out, spa_out, summary, var, values, scenario_out;
    double t_gen = 0.0;
    double issue_time = 0.0;
    int n_seeds = 1;

    auto* plan = app.add_subcommand("plan", "build an aggregation plan for given targets");
    auto* plan_src = plan->add_option_group("input");
    plan_src->add_option("--tcg", in.tcg_path, "stat-tcg/1 file")->check(CLI::ExistingFile);
    plan_src->add_option("--scenario", in.scenario_path, "stat-scenario/1 file")->check(CLI::ExistingFile);
    plan_src->require_option(1);
    plan->add_option("--targets", targets, "comma-separated target ids")->required();
    plan->add_option("--ground-station", ground);
    plan->add_option("--t-gen", t_gen, "generation time of every target (s)")->capture_default_str();
    plan->add_option("--planner", planner)->check(CLI::IsMember({"esta", "bsta", "both"}))->capture_default_str();
    plan->add_option("--contact-mode", in.contact_mode)->check(CLI::IsMember({"intervals", "hull"}));
    plan->add_option("--out", out, "tree output (stat-tree/1)");
    plan->add_option("--spa-out", spa_out, "SPA tables (stat-spa/1 array)");
    add_config_flags(*plan, cfg);

    auto* sim = app.add_subcommand("simulate", "simulate queries end to end with both planners");
    auto* sim_src = sim->add_option_group("input");
    sim_src->add_option("--tcg", in.tcg_path)->check(CLI::ExistingFile);
    sim_src->add_option("--scenario", in.scenario_path)->check(CLI::ExistingFile);
    sim_src->require_option(0, 1);
    sim->add_option("--targets", targets, "targets (with --tcg)");
    sim->add_option("--ground-station", ground);
    sim->add_option("--issue-time", issue_time, "query issue time (with --tcg)");
    sim->add_option("--out", out, "results CSV");
    add_config_flags(*sim, cfg);

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    sweep->add_option("--var", var, "region_ratio|time_period|query_count|uav_speed|comm_range|zeta")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();
    sweep->add_option("--seeds", n_seeds, "number of consecutive seeds starting at --seed")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep->add_option("--out", out, "results CSV");
    sweep->add_option("--summary", summary, "summary JSON (stat-summary/1)");
    add_config_flags(*sweep, cfg);

    auto* exp = app.add_subcommand("export-tcg", "build and export a contact graph");
    exp->add_option("--scenario", in.scenario_path)->check(CLI::ExistingFile);
    exp->add_option("--contact-mode", in.contact_mode)->check(CLI::IsMember({"intervals", "hull"}));
    exp->add_option("--out", out, "stat-tcg/1 output");
    exp->add_option("--scenario-out", scenario_out, "generated scenario (stat-scenario/1)");
    add_config_flags(*exp, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*plan) return cmd_plan(in, cfg, targets, ground, t_gen, planner, out, spa_out);
        if (*sim) {
            if (!in.tcg_path.empty() && targets.empty()) {
                throw InvalidArgument("--targets is required with --tcg");
            }
            return cmd_simulate(in, cfg, targets, ground, issue_time, out);
        }
        if (*sweep) return cmd_sweep(cfg, var, values, n_seeds, out, summary);
        if (*exp) return cmd_export_tcg(in, cfg, out, scenario_out);
    } catch (const InfeasibleQuery& e) {
        fmt::print(std::cerr, "infeasible query: {}\n", e.what());
        return kExitInfeasible;
    } catch (const InternalConsistencyError& e) {
        fmt::print(std::cerr, "internal consistency failure: {}\n", e.what());
        return kExitInternal;
    } catch (const std::invalid_argument& e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
