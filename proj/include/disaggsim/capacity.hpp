#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "disaggsim/catalog.hpp"
#include "disaggsim/common.hpp"
#include "disaggsim/failures.hpp"
#include "disaggsim/model.hpp"
#include "disaggsim/placement.hpp"
#include "disaggsim/simcore.hpp"
#include "disaggsim/workload.hpp"

namespace disaggsim {

// Offline characterization result for one (model, serving-unit) pair: the
// latency-bounded throughput and peak power that drive online allocation.
struct CharacterizationEntry {
  std::string model_id;
  std::string unit_config_id;
  double qps = 0;           // latency-bounded throughput of one unit
  double peak_power_w = 0;  // every component at TDP
  int best_batch = 0;
};

// Units required for one interval:
//   N >= (1+R%) load/QPS + ((F_CN% n + F_MN% m)/(n+m)) load_peak/QPS
// Percentages are percent points (R=10 means 10%).
inline long required_units_at(double load_qps, double unit_qps, double r_pct,
                              double f_cn_pct, double f_mn_pct, int n, int m,
                              double load_peak_qps) {
  if (unit_qps <= 0) throw InfeasibleError("required_units: unit QPS must be > 0");
  const double demand = (1.0 + r_pct / 100.0) * load_qps / unit_qps;
  const double failure = ((f_cn_pct / 100.0) * n + (f_mn_pct / 100.0) * m) /
                         static_cast<double>(n + m) * load_peak_qps / unit_qps;
  return ceil_units(demand + failure);
}

inline std::vector<long> required_units(const LoadCurve& load, const CharacterizationEntry& entry,
                                        double r_pct, double f_cn_pct, double f_mn_pct,
                                        int n, int m) {
  load.validate();
  const double peak = load.peak_qps();
  std::vector<long> n_t;
  n_t.reserve(load.rates_qps.size());
  for (double rate : load.rates_qps)
    n_t.push_back(required_units_at(rate, entry.qps, r_pct, f_cn_pct, f_mn_pct, n, m, peak));
  return n_t;
}

struct EconomicParams {
  double electricity_usd_per_kwh = 0.10;
  double horizon_years = 3.0;
};

// Per-interval allocation plus the horizon TCO split.
struct AllocationPlan {
  std::vector<long> n_t;
  long n_peak = 0;
  std::vector<double> p_t;  // watts, provisioned power at equality
  double r_pct = 0;
  double capex_usd = 0;
  double opex_usd = 0;
  double tco_usd = 0;
};

// TCO over the machine lifetime: capex buys the peak allocation once; opex
// prices the energy of the load curve tiled across the horizon.
inline AllocationPlan plan_tco(const LoadCurve& load, const CharacterizationEntry& entry,
                               double unit_capex_usd, double r_pct, double f_cn_pct,
                               double f_mn_pct, int n, int m,
                               const EconomicParams& econ = {}) {
  AllocationPlan plan;
  plan.r_pct = r_pct;
  plan.n_t = required_units(load, entry, r_pct, f_cn_pct, f_mn_pct, n, m);
  for (long k : plan.n_t) {
    plan.n_peak = std::max(plan.n_peak, k);
    plan.p_t.push_back(entry.peak_power_w * static_cast<double>(k));
  }
  plan.capex_usd = static_cast<double>(plan.n_peak) * unit_capex_usd;

  double curve_energy_j = 0;  // one pass of the curve
  for (double watts : plan.p_t) curve_energy_j += watts * load.interval_s;
  const double horizon_s = econ.horizon_years * 365.0 * 86400.0;
  const double passes = horizon_s / load.duration_s();
  plan.opex_usd = curve_energy_j * passes / 3.6e6 * econ.electricity_usd_per_kwh;
  plan.tco_usd = plan.capex_usd + plan.opex_usd;
  return plan;
}

// --- unit building and characterization ----------------------------------------

struct CharacterizationOptions {
  std::vector<int> batch_candidates = {32, 64, 128, 256};
  int rate_grid_points = 128;
  double trace_duration_s = 1.0;
  std::uint64_t seed = 1;
  double sla_us = 100000.0;
  SchedulerKind scheduler = SchedulerKind::sequential;
  QuerySizeDist size_dist;
  double plateau_eps = 0.01;
  int n_backup_cns = 0;
  int n_backup_mns = 0;
};

// A serving unit wired for the engine plus its cost/power facts.
struct BuiltUnit {
  std::shared_ptr<const ModelSpec> model;
  UnitSetup setup;  // template; copied per simulation run
  double unit_capex_usd = 0;
  double unit_peak_power_w = 0;
  std::string unit_config_id;
  int n = 1, m = 1;
  FailureClass cn_failure_class = FailureClass::gpu_class;
  FailureClass mn_failure_class = FailureClass::mn_class;
};

// Assembles placement, routing, perf parameters, and the energy model for
// one serving unit. Throws CapacityError when the model cannot fit.
inline BuiltUnit build_unit(std::shared_ptr<const ModelSpec> model,
                            const ServingUnitConfig& cfg, const Catalog& catalog,
                            const CharacterizationOptions& opts = {}) {
  cfg.validate();
  BuiltUnit built;
  built.model = model;
  built.n = cfg.n_cns;
  built.m = cfg.m_mns;
  built.unit_capex_usd = unit_capex(cfg, catalog);
  built.unit_peak_power_w = unit_peak_power(cfg, catalog);
  built.unit_config_id = std::string(to_string(cfg.deployment)) + ":" + cfg.cn.node_id +
                         "x" + std::to_string(cfg.n_cns) + "+" + cfg.mn.node_id + "x" +
                         std::to_string(cfg.m_mns);
  built.cn_failure_class = cfg.cn.failure_class;
  built.mn_failure_class =
      cfg.deployment == Deployment::disaggregated ? cfg.mn.failure_class : cfg.cn.failure_class;

  UnitSetup& u = built.setup;
  u.deployment = cfg.deployment;
  u.n_cns = cfg.n_cns;
  u.m_mns = is_scale_up(cfg.deployment) ? 1 : cfg.m_mns;
  u.gpus_per_cn = std::max(1, gpu_count(cfg.cn, catalog));
  u.n_backup_cns = opts.n_backup_cns;
  u.n_backup_mns = opts.n_backup_mns;
  u.scheduler = opts.scheduler;
  u.model = model;
  u.perf.network = LinkModel{cfg.intra_unit_bandwidth_gibps, u.perf.network.per_message_latency_us};
  u.mn_bandwidth_gibps = cfg.mn.local_mem_bandwidth_gibps;
  u.power.gpu_tdp = resolve_device(catalog, "a100").tdp_watts;
  u.power.cn_nic_tdp = resolve_device(catalog, "nic_cx6").tdp_watts;
  u.power.cn_cpu_tdp = std::max(
      0.0, node_peak_power(cfg.cn, catalog) -
               gpu_count(cfg.cn, catalog) * u.power.gpu_tdp - u.power.cn_nic_tdp);
  u.power.mn_tdp = node_peak_power(cfg.mn, catalog);

  if (is_scale_up(cfg.deployment)) {
    if (model->total_sparse_bytes() > cfg.cn.memory_capacity_bytes())
      throw CapacityError(cfg.cn.node_id + " cannot hold " +
                          std::to_string(model->total_sparse_bytes()) + " sparse bytes");
    const NumaMode mode = cfg.deployment == Deployment::scale_up_naive
                              ? NumaMode::naive
                              : NumaMode::numa_aware;
    u.cost_model = std::make_shared<ScaleUpCostModel>(*model, mode, u.perf);
    u.mn_capacity_bytes.assign(1, cfg.cn.memory_capacity_bytes());
    return built;
  }

  const NodeConfig& memory_node =
      cfg.deployment == Deployment::disaggregated ? cfg.mn : cfg.cn;
  u.mn_bandwidth_gibps = memory_node.local_mem_bandwidth_gibps;
  std::vector<std::uint64_t> caps(static_cast<std::size_t>(cfg.m_mns),
                                  memory_node.memory_capacity_bytes());
  // The replica count from total bytes can be a knife edge (capacity exactly
  // n_replicas model copies); whole-table granularity then has no headroom,
  // so fall back replica by replica before giving up.
  int n_replicas = compute_n_replicas(model->tables, caps);
  for (;; --n_replicas) {
    try {
      u.plan = greedy_allocate(model->tables, caps, n_replicas);
      break;
    } catch (const PlacementError&) {
      if (n_replicas <= 1) throw;
    }
  }
  std::vector<int> tasks;
  for (int t = 0; t < cfg.n_cns; ++t) tasks.push_back(t);
  u.routing = greedy_route(u.plan, model->tables, tasks);
  u.mn_capacity_bytes.assign(static_cast<std::size_t>(cfg.m_mns + opts.n_backup_mns),
                             memory_node.memory_capacity_bytes());
  return built;
}

// Mean of the (truncated) query-size distribution, estimated with a fixed
// deterministic sample so rate grids are reproducible.
inline double mean_query_samples(const QuerySizeDist& dist) {
  Rng rng(0x5eed);
  double sum = 0;
  constexpr int kDraws = 4096;
  for (int i = 0; i < kDraws; ++i) sum += dist.sample(rng);
  return sum / kDraws;
}

// Analytic samples/s capacity estimate used to bracket the pressure-test
// rate grid. Takes the tightest of the CN cpu, CN links, GPU replicas, and
// per-MN service occupancies at this batch size.
inline double estimate_capacity_qps(const BuiltUnit& built, int batch,
                                    const QuerySizeDist& dist) {
  std::shared_ptr<const StageCostModel> cost = built.setup.cost_model;
  if (!cost) cost = make_routed_cost_model(built.setup, built.setup.routing);
  const double b = batch;
  const int n = built.setup.n_cns;
  double samples_per_s = 1e18;
  auto cap = [&](double per_batch_us, double parallel) {
    if (per_batch_us <= 0) return;
    samples_per_s = std::min(samples_per_s, parallel * b / per_batch_us * kUsPerSec);
  };
  std::map<int, double> shard_sum;
  for (int task = 0; task < n; ++task) {
    double pk = 0;
    for (const auto& [mn, us] : cost->packet_us(batch, task)) pk += us;
    for (int mn : cost->shard_set(task)) shard_sum[mn] += cost->shard_us(batch, task, mn);
    cap(cost->preprocess_us(batch, task), n);
    cap(pk, n);
    cap(cost->gather_us(batch, task), n);
    cap(cost->dense_us(batch, task), n * built.setup.gpus_per_cn);
  }
  for (const auto& [mn, total] : shard_sum)
    cap(total / n, 1.0);  // each MN serves every task's batches
  return samples_per_s / std::max(1.0, mean_query_samples(dist));
}

// Offline workload characterization: hill climb over batch sizes with a
// binary rate search per candidate.
inline CharacterizationEntry characterize_unit(const BuiltUnit& built,
                                               const CharacterizationOptions& opts,
                                               HillClimbResult* detail = nullptr) {
  std::shared_ptr<const StageCostModel> cost = built.setup.cost_model;
  if (!cost) cost = make_routed_cost_model(built.setup, built.setup.routing);

  double cap_hi = 0;
  for (int batch : opts.batch_candidates)
    cap_hi = std::max(cap_hi, estimate_capacity_qps(built, batch, opts.size_dist));
  if (cap_hi <= 0) throw InfeasibleError("characterize: zero capacity estimate");
  const auto grid =
      geometric_rate_grid(cap_hi * 0.02, cap_hi * 1.5, opts.rate_grid_points);

  auto run_at = [&](int batch, double rate) {
    UnitSetup setup = built.setup;
    setup.max_batch = batch;
    setup.scheduler = opts.scheduler;
    const auto trace =
        gen_trace(constant_curve(rate, opts.trace_duration_s), opts.size_dist, opts.seed);
    Simulation sim(std::move(setup));
    return sim.run(trace, opts.sla_us);
  };
  const HillClimbResult hc = hill_climb_qps(run_at, opts.sla_us, opts.batch_candidates,
                                            grid, opts.plateau_eps);
  if (detail) *detail = hc;
  CharacterizationEntry entry;
  entry.model_id = built.model->model_id;
  entry.unit_config_id = built.unit_config_id;
  entry.qps = hc.best_qps;
  entry.peak_power_w = built.unit_peak_power_w;
  entry.best_batch = hc.best_batch;
  return entry;
}

// --- 2D grid exploration ----------------------------------------------------------

struct GridCell {
  int n = 0, m = 0;
  bool feasible = false;
  double qps = 0;
  double power_w = 0;
  double tco_usd = 0;
  int best_batch = 0;
  long n_peak = 0;
  std::string note;
};

struct GridResult {
  std::vector<GridCell> cells;
  int opt_n = 0, opt_m = 0;
  double opt_tco_usd = 0;
};

struct GridSpec {
  std::shared_ptr<const ModelSpec> model;
  NodeConfig cn;
  NodeConfig mn;
  Deployment deployment = Deployment::disaggregated;
  std::vector<int> n_values;
  std::vector<int> m_values;
  CharacterizationOptions copts;
  LoadCurve workload;
  double r_pct = 10.0;
  FailureRates rates;
  EconomicParams econ;
  int threads = 1;
};

namespace detail {
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const auto workers = static_cast<std::size_t>(threads);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}
}  // namespace detail

// Evaluates every {n CNs, m MNs} cell: placement + routing + hill-climb
// characterization + TCO. Cells without enough MN memory are marked
// infeasible. The optimum is the feasible TCO argmin (ties: fewer total
// nodes, then fewer CNs). Cells are independent; results are keyed by cell,
// so multi-threaded runs reduce deterministically.
inline GridResult grid_optimize(const GridSpec& spec, const Catalog& catalog) {
  if (spec.n_values.empty() || spec.m_values.empty())
    throw ConfigError("grid_optimize: empty n/m ranges");
  GridResult result;
  result.cells.resize(spec.n_values.size() * spec.m_values.size());

  const double f_cn = spec.rates.daily_pct(spec.cn.failure_class);
  const double f_mn = spec.deployment == Deployment::disaggregated
                          ? spec.rates.daily_pct(spec.mn.failure_class)
                          : f_cn;

  detail::parallel_for(result.cells.size(), spec.threads, [&](std::size_t idx) {
    const int n = spec.n_values[idx / spec.m_values.size()];
    const int m = spec.m_values[idx % spec.m_values.size()];
    GridCell cell;
    cell.n = n;
    cell.m = m;
    try {
      const auto cfg = make_unit_config(spec.cn, n, spec.mn, m, spec.deployment);
      const BuiltUnit built = build_unit(spec.model, cfg, catalog, spec.copts);
      const CharacterizationEntry entry = characterize_unit(built, spec.copts);
      if (entry.qps <= 0) {
        cell.note = "SLA unattainable";
      } else {
        const AllocationPlan plan =
            plan_tco(spec.workload, entry, built.unit_capex_usd, spec.r_pct, f_cn, f_mn,
                     n, m, spec.econ);
        cell.feasible = true;
        cell.qps = entry.qps;
        cell.power_w = entry.peak_power_w;
        cell.best_batch = entry.best_batch;
        cell.tco_usd = plan.tco_usd;
        cell.n_peak = plan.n_peak;
      }
    } catch (const InfeasibleError& e) {
      cell.note = e.what();
    }
    result.cells[idx] = std::move(cell);
  });

  const GridCell* best = nullptr;
  for (const auto& cell : result.cells) {
    if (!cell.feasible) continue;
    if (!best || cell.tco_usd < best->tco_usd ||
        (cell.tco_usd == best->tco_usd &&
         (cell.n + cell.m < best->n + best->m ||
          (cell.n + cell.m == best->n + best->m && cell.n < best->n))))
      best = &cell;
  }
  if (!best) {
    std::uint64_t need = spec.model->total_sparse_bytes();
    throw InfeasibleError("no feasible grid cell: model needs " + std::to_string(need) +
                          " bytes of MN memory");
  }
  result.opt_n = best->n;
  result.opt_m = best->m;
  result.opt_tco_usd = best->tco_usd;
  return result;
}

// --- deployment comparison --------------------------------------------------------

struct ComparisonRow {
  int generation = 0;
  std::string model_id;
  std::string mono_config;
  double mono_tco_usd = 0;
  std::string disagg_config;
  double disagg_tco_usd = 0;
  double savings_pct = 0;
  double failure_share_pct = 0;      // share of savings from MN failure rates
  double utilization_share_pct = 0;  // remainder
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  double mono_total_usd = 0;
  double disagg_total_usd = 0;
  double total_savings_pct = 0;
};

struct CompareSpec {
  GenerationSeries series;
  std::vector<int> generations = {0, 1, 2, 3, 4, 5};
  std::vector<NodeConfig> mono_servers;  // e.g. SO-1S with 1/2/4 GPUs
  std::vector<NodeConfig> disagg_cns;
  std::vector<NodeConfig> disagg_mns;
  std::vector<int> unit_counts = {1, 2, 3, 4, 5, 6, 7, 8};  // n (and m) ranges
  CharacterizationOptions copts;
  LoadCurve workload;
  double r_pct = 10.0;
  FailureRates rates;
  EconomicParams econ;
  int threads = 1;
};

// Per generation: cheapest monolithic scale-out cluster (diagonal cells,
// bundled failure rate) vs. cheapest disaggregated cluster (full grid,
// per-class failure rates). The failure share of the savings is isolated by
// re-pricing the winning disaggregated cell with the monolithic failure rate
// applied to its MNs.
inline ComparisonReport compare_deployments(const CompareSpec& spec, const Catalog& catalog) {
  ComparisonReport report;
  for (int k : spec.generations) {
    auto model = std::make_shared<ModelSpec>(make_generation(spec.series, k));
    ComparisonRow row;
    row.generation = k;
    row.model_id = model->model_id;

    // monolithic side: diagonal (j, j) cells only
    double best_mono = -1;
    for (const auto& server : spec.mono_servers) {
      for (int j : spec.unit_counts) {
        try {
          const auto cfg =
              make_unit_config(server, j, server, j, Deployment::monolithic_scale_out);
          const BuiltUnit built = build_unit(model, cfg, catalog, spec.copts);
          const CharacterizationEntry entry = characterize_unit(built, spec.copts);
          if (entry.qps <= 0) continue;
          const double f = spec.rates.daily_pct(server.failure_class);
          const AllocationPlan plan = plan_tco(spec.workload, entry, built.unit_capex_usd,
                                               spec.r_pct, f, f, j, j, spec.econ);
          if (best_mono < 0 || plan.tco_usd < best_mono) {
            best_mono = plan.tco_usd;
            row.mono_config = built.unit_config_id;
          }
        } catch (const InfeasibleError&) {
          continue;
        }
      }
    }
    if (best_mono < 0) {
      row.mono_config = "infeasible";
      report.rows.push_back(row);
      continue;
    }
    row.mono_tco_usd = best_mono;

    // disaggregated side: full grid per CN/MN option pair
    double best_disagg = -1;
    double best_disagg_fm_as_cn = 0;
    for (const auto& cn : spec.disagg_cns) {
      for (const auto& mn : spec.disagg_mns) {
        GridSpec gs;
        gs.model = model;
        gs.cn = cn;
        gs.mn = mn;
        gs.deployment = Deployment::disaggregated;
        gs.n_values = spec.unit_counts;
        gs.m_values = spec.unit_counts;
        gs.copts = spec.copts;
        gs.workload = spec.workload;
        gs.r_pct = spec.r_pct;
        gs.rates = spec.rates;
        gs.econ = spec.econ;
        gs.threads = spec.threads;
        GridResult grid;
        try {
          grid = grid_optimize(gs, catalog);
        } catch (const InfeasibleError&) {
          continue;
        }
        if (best_disagg < 0 || grid.opt_tco_usd < best_disagg) {
          best_disagg = grid.opt_tco_usd;
          row.disagg_config = std::string(cn.node_id) + "x" + std::to_string(grid.opt_n) +
                              "+" + mn.node_id + "x" + std::to_string(grid.opt_m);
          // re-price the winning cell with the monolithic failure rate on MNs
          for (const auto& cell : grid.cells) {
            if (cell.n != grid.opt_n || cell.m != grid.opt_m) continue;
            CharacterizationEntry entry;
            entry.qps = cell.qps;
            entry.peak_power_w = cell.power_w;
            const auto cfg = make_unit_config(cn, cell.n, mn, cell.m,
                                              Deployment::disaggregated);
            const double f_cn = spec.rates.daily_pct(cn.failure_class);
            const AllocationPlan repriced =
                plan_tco(spec.workload, entry, unit_capex(cfg, catalog), spec.r_pct, f_cn,
                         f_cn, cell.n, cell.m, spec.econ);
            best_disagg_fm_as_cn = repriced.tco_usd;
          }
        }
      }
    }
    if (best_disagg < 0) {
      row.disagg_config = "infeasible";
      report.rows.push_back(row);
      continue;
    }
    row.disagg_tco_usd = best_disagg;
    row.savings_pct = (best_mono - best_disagg) / best_mono * 100.0;
    const double total_saving = best_mono - best_disagg;
    if (total_saving > 0) {
      const double failure_saving =
          std::max(0.0, std::min(best_disagg_fm_as_cn - best_disagg, total_saving));
      row.failure_share_pct = failure_saving / total_saving * 100.0;
      row.utilization_share_pct = 100.0 - row.failure_share_pct;
    }
    report.rows.push_back(row);
  }
  for (const auto& row : report.rows) {
    report.mono_total_usd += row.mono_tco_usd;
    report.disagg_total_usd += row.disagg_tco_usd;
  }
  if (report.mono_total_usd > 0)
    report.total_savings_pct =
        (report.mono_total_usd - report.disagg_total_usd) / report.mono_total_usd * 100.0;
  return report;
}

}  // namespace disaggsim
