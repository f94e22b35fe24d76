// disaggsim: deterministic simulator and capacity planner for recommendation
// inference serving on disaggregated compute/memory clusters.
//
// Subcommands: place, simulate, characterize, plan, optimize, compare.
// Every output file embeds the resolved config manifest; a rerun with the
// same config and seed reproduces each file byte for byte.
//
// Exit codes: 0 ok, 2 config error, 3 infeasible, 4 internal invariant.

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "disaggsim/capacity.hpp"
#include "disaggsim/config.hpp"
#include "disaggsim/serde.hpp"

namespace disaggsim {
namespace {

bool log_enabled() {
  const char* lvl = std::getenv("DISAGGSIM_LOG");
  return lvl && (std::strcmp(lvl, "info") == 0 || std::strcmp(lvl, "debug") == 0);
}

void log_line(const std::string& msg) {
  if (log_enabled()) std::cerr << "[disaggsim] " << msg << "\n";
}

std::string manifest_line(const Experiment& exp) {
  return exp.manifest.dump();
}

void write_json(const std::filesystem::path& path, json payload, const Experiment& exp) {
  payload["manifest"] = exp.manifest;
  atomic_write(path, payload.dump(2) + "\n");
  log_line("wrote " + path.string());
}

std::vector<std::uint64_t> mn_caps(const Experiment& exp) {
  const NodeConfig& memory_node = exp.unit.deployment == Deployment::disaggregated
                                      ? exp.unit.mn
                                      : exp.unit.cn;
  return std::vector<std::uint64_t>(static_cast<std::size_t>(exp.unit.m_mns),
                                    memory_node.memory_capacity_bytes());
}

FailureTrace make_failure_trace(const Experiment& exp) {
  if (!exp.failures_enabled) return {};
  const bool bundled = exp.unit.deployment != Deployment::disaggregated;
  std::vector<std::pair<std::string, FailureProfile>> nodes;
  const int total_cns = exp.unit.n_cns + exp.copts.n_backup_cns;
  for (int i = 0; i < total_cns; ++i)
    nodes.emplace_back((bundled ? "srv" : "cn") + std::to_string(i), exp.cn_profile);
  if (!bundled) {
    const int total_mns = exp.unit.m_mns + exp.copts.n_backup_mns;
    for (int j = 0; j < total_mns; ++j)
      nodes.emplace_back("mn" + std::to_string(j), exp.mn_profile);
  }
  return gen_failure_trace(nodes, exp.failure_horizon_days, exp.failure_seed);
}

int cmd_place(const Experiment& exp, const std::filesystem::path& out) {
  const auto caps = mn_caps(exp);
  const auto& tables = exp.model->tables;
  const int n_replicas = exp.n_replicas_override > 0 ? exp.n_replicas_override
                                                     : compute_n_replicas(tables, caps);
  const PlacementPlan plan = greedy_allocate(tables, caps, n_replicas);
  std::vector<int> tasks;
  for (int t = 0; t < exp.unit.n_cns; ++t) tasks.push_back(t);
  const RoutingTable routing = greedy_route(plan, tables, tasks);

  std::vector<double> greedy_loads;
  for (const auto& [mn, load] : routing.routed_load) greedy_loads.push_back(load);
  const double greedy_cov = coeff_of_variation(greedy_loads);
  double max_weight = 0;
  for (const auto& t : tables) max_weight = std::max(max_weight, t.access_weight());
  const double spread = *std::max_element(greedy_loads.begin(), greedy_loads.end()) -
                        *std::min_element(greedy_loads.begin(), greedy_loads.end());

  int wins = 0;
  double random_cov_sum = 0;
  for (int seed = 0; seed < exp.random_baseline_seeds; ++seed) {
    const auto [rplan, rroute] = random_allocate_route(
        tables, caps, n_replicas, tasks, static_cast<std::uint64_t>(seed));
    std::vector<double> loads;
    for (const auto& [mn, load] : rroute.routed_load) loads.push_back(load);
    const double cov = coeff_of_variation(loads);
    random_cov_sum += cov;
    if (greedy_cov < cov) ++wins;
  }

  json per_mn = json::object();
  const auto placed = placed_bytes_per_mn(plan, tables);
  for (const auto& [mn, load] : routing.routed_load)
    per_mn[std::to_string(mn)] = {{"routed_load", load}, {"placed_bytes", placed.at(mn)}};

  json payload{
      {"n_replicas", n_replicas},
      {"n_tables", tables.size()},
      {"m_mns", caps.size()},
      {"plan", to_json(plan)},
      {"per_mn", std::move(per_mn)},
      {"greedy", {{"cov", greedy_cov},
                  {"load_spread", spread},
                  {"max_access_weight", max_weight},
                  {"spread_within_max_weight", spread <= max_weight + 1e-9}}},
      {"random_baseline",
       {{"seeds", exp.random_baseline_seeds},
        {"greedy_wins", wins},
        {"mean_cov", exp.random_baseline_seeds ? random_cov_sum / exp.random_baseline_seeds
                                               : 0.0}}},
  };
  write_json(out / "place.json", std::move(payload), exp);
  if (exp.emit_routing) {
    std::ostringstream csv;
    csv << "# " << manifest_line(exp) << "\n";
    csv << "task_id,table_id,dest_mn\n";
    for (const auto& e : routing.entries)
      csv << e.task_id << "," << e.table_id << "," << e.dest_mn << "\n";
    atomic_write(out / "routing.csv", csv.str());
  }
  return 0;
}

int cmd_simulate(const Experiment& exp, const std::filesystem::path& out) {
  CharacterizationOptions copts = exp.copts;
  BuiltUnit built = build_unit(exp.model, exp.unit, exp.catalog, copts);
  built.setup.scheduler = exp.schedulers.front();
  built.setup.max_batch = exp.sim_max_batch;
  built.setup.max_wait_us = exp.sim_max_wait_us;
  built.setup.cn_profile = exp.cn_profile;
  built.setup.mn_profile = exp.mn_profile;
  if (!exp.failure_trace_csv_path.empty())
    built.setup.failure_trace = failure_trace_from_csv(read_file(exp.failure_trace_csv_path));
  else
    built.setup.failure_trace = make_failure_trace(exp);
  const auto trace = exp.trace_csv_path.empty()
                         ? gen_trace(exp.curve, exp.size_dist, exp.workload_seed)
                         : trace_from_csv(read_file(exp.trace_csv_path));
  log_line("simulating " + std::to_string(trace.size()) + " queries on " +
           built.unit_config_id);
  Simulation sim(built.setup);
  if (exp.emit_event_log) sim.enable_event_log();
  const SimResult result = sim.run(trace, exp.sla_us);

  json payload{{"unit_config_id", built.unit_config_id},
               {"scheduler", to_string(exp.schedulers.front())},
               {"result", to_json(result, exp.emit_latencies)},
               {"routing_installs", sim.routing_history().size() - 1},
               {"failure_events", built.setup.failure_trace.events.size()}};
  write_json(out / "simresult.json", std::move(payload), exp);
  if (exp.emit_trace) atomic_write(out / "trace.csv", trace_to_csv(trace, manifest_line(exp)));
  if (exp.failures_enabled || !built.setup.failure_trace.events.empty())
    atomic_write(out / "failures.csv",
                 failure_trace_to_csv(built.setup.failure_trace, manifest_line(exp)));
  if (exp.emit_event_log) {
    std::ostringstream csv;
    csv << "# " << manifest_line(exp) << "\n";
    csv << "time_us,kind,id,node\n";
    for (const auto& row : sim.event_log())
      csv << csvfmt::num(row.time_us) << "," << row.kind << "," << row.id << ","
          << row.node << "\n";
    atomic_write(out / "event_log.csv", csv.str());
  }
  return 0;
}

int cmd_characterize(const Experiment& exp, const std::filesystem::path& out) {
  json entries = json::array();
  for (SchedulerKind sched : exp.schedulers) {
    CharacterizationOptions copts = exp.copts;
    copts.scheduler = sched;
    const BuiltUnit built = build_unit(exp.model, exp.unit, exp.catalog, copts);
    HillClimbResult detail;
    const CharacterizationEntry entry = characterize_unit(built, copts, &detail);
    log_line(std::string("characterized ") + to_string(sched) + ": qps=" +
             std::to_string(entry.qps));
    json e = to_json(entry);
    e["scheduler"] = to_string(sched);
    e["hill_climb"] = to_json(detail);
    entries.push_back(std::move(e));
  }
  write_json(out / "characterization.json", json{{"entries", std::move(entries)}}, exp);
  return 0;
}

int cmd_plan(const Experiment& exp, const std::filesystem::path& out) {
  const BuiltUnit built = build_unit(exp.model, exp.unit, exp.catalog, exp.copts);
  const CharacterizationEntry entry = characterize_unit(built, exp.copts);
  if (entry.qps <= 0) throw InfeasibleError("unit cannot meet the SLA at any rate");
  const double f_cn = exp.rates.daily_pct(built.cn_failure_class);
  const double f_mn = exp.rates.daily_pct(built.mn_failure_class);
  const AllocationPlan plan = plan_tco(exp.curve, entry, built.unit_capex_usd, exp.r_pct,
                                       f_cn, f_mn, built.n, built.m, exp.econ);
  json payload{{"entry", to_json(entry)},
               {"unit_capex_usd", built.unit_capex_usd},
               {"f_cn_pct", f_cn},
               {"f_mn_pct", f_mn},
               {"allocation", to_json(plan)}};
  write_json(out / "plan.json", std::move(payload), exp);
  atomic_write(out / "allocation.csv", allocation_to_csv(exp.curve, plan, manifest_line(exp)));
  return 0;
}

int cmd_optimize(const Experiment& exp, const std::filesystem::path& out) {
  GridSpec spec;
  spec.model = exp.model;
  spec.cn = exp.unit.cn;
  spec.mn = exp.unit.mn;
  spec.deployment = exp.unit.deployment;
  spec.n_values = exp.n_values;
  spec.m_values = exp.m_values;
  spec.copts = exp.copts;
  spec.workload = exp.curve;
  spec.r_pct = exp.r_pct;
  spec.rates = exp.rates;
  spec.econ = exp.econ;
  spec.threads = exp.threads;
  const GridResult grid = grid_optimize(spec, exp.catalog);
  log_line("optimum: n=" + std::to_string(grid.opt_n) + " m=" + std::to_string(grid.opt_m));
  write_json(out / "optimize.json", to_json(grid), exp);
  atomic_write(out / "grid.csv", grid_to_csv(grid, manifest_line(exp)));
  return 0;
}

int cmd_compare(const Experiment& exp, const std::filesystem::path& out) {
  if (!exp.has_series)
    throw ConfigError("compare needs a series model (model.kind = \"series\")");
  CompareSpec spec;
  spec.series = exp.series;
  spec.generations = exp.generations;
  for (const auto& name : exp.mono_servers)
    spec.mono_servers.push_back(node_from_preset(name, exp.catalog));
  for (const auto& name : exp.disagg_cns)
    spec.disagg_cns.push_back(node_from_preset(name, exp.catalog));
  for (const auto& name : exp.disagg_mns)
    spec.disagg_mns.push_back(node_from_preset(name, exp.catalog));
  spec.unit_counts = exp.unit_counts;
  spec.copts = exp.copts;
  spec.workload = exp.curve;
  spec.r_pct = exp.r_pct;
  spec.rates = exp.rates;
  spec.econ = exp.econ;
  spec.threads = exp.threads;
  const ComparisonReport report = compare_deployments(spec, exp.catalog);
  write_json(out / "compare.json", to_json(report), exp);
  atomic_write(out / "compare.csv", comparison_to_csv(report, manifest_line(exp)));
  return 0;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"disaggsim: capacity planner for disaggregated recommendation serving"};
  app.require_subcommand(1);
  app.fallthrough();  // accept global options after the subcommand name

  std::string config_path;
  std::string preset_name;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;
  app.add_option("--config", config_path, "experiment config JSON file");
  app.add_option("--preset", preset_name, "built-in experiment preset name");
  app.add_option("--seed", seed, "override workload/failure seeds");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads for grid cells");

  auto* place = app.add_subcommand("place", "greedy embedding placement and routing");
  auto* simulate = app.add_subcommand("simulate", "run one serving-unit simulation");
  auto* characterize =
      app.add_subcommand("characterize", "offline latency-bounded throughput search");
  auto* plan = app.add_subcommand("plan", "failure-aware unit allocation and TCO");
  auto* optimize = app.add_subcommand("optimize", "explore the {n CNs, m MNs} grid");
  auto* compare = app.add_subcommand("compare", "monolithic vs disaggregated TCO study");

  CLI11_PARSE(app, argc, argv);

  json root;
  if (!config_path.empty() && !preset_name.empty())
    throw ConfigError("pass either --config or --preset, not both");
  if (!config_path.empty()) {
    root = json::parse(read_file(config_path), nullptr, /*allow_exceptions=*/true);
  } else if (!preset_name.empty()) {
    const auto& presets = preset_configs();
    auto it = presets.find(preset_name);
    if (it == presets.end()) {
      std::string known;
      for (const auto& [name, cfg] : presets) known += " " + name;
      throw ConfigError("unknown preset \"" + preset_name + "\"; available:" + known);
    }
    root = it->second;
  } else {
    throw ConfigError("one of --config or --preset is required");
  }

  const Experiment exp = load_experiment(root, seed, threads);
  const std::filesystem::path out(out_dir);
  if (place->parsed()) return cmd_place(exp, out);
  if (simulate->parsed()) return cmd_simulate(exp, out);
  if (characterize->parsed()) return cmd_characterize(exp, out);
  if (plan->parsed()) return cmd_plan(exp, out);
  if (optimize->parsed()) return cmd_optimize(exp, out);
  if (compare->parsed()) return cmd_compare(exp, out);
  throw ConfigError("no subcommand");
}

}  // namespace
}  // namespace disaggsim

int main(int argc, char** argv) {
  try {
    return disaggsim::run_cli(argc, argv);
  } catch (const disaggsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const disaggsim::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const std::logic_error& e) {
    std::cerr << "internal invariant violated: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
