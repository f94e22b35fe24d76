#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "disaggsim/serde.hpp"

namespace disaggsim {

// Strict key checking: every object in the experiment config must contain
// only known keys, so typos fail loudly instead of silently using defaults.
inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError(context + ": unknown key \"" + key + "\"");
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

// Fully resolved experiment inputs, plus the resolved-config manifest echoed
// into every output file.
struct Experiment {
  json manifest;
  Catalog catalog;
  std::shared_ptr<const ModelSpec> model;
  GenerationSeries series;  // populated for series configs (compare)
  bool has_series = false;
  ServingUnitConfig unit;
  LoadCurve curve;
  QuerySizeDist size_dist;
  std::uint64_t workload_seed = 1;
  double sla_us = 100000.0;
  std::vector<SchedulerKind> schedulers = {SchedulerKind::sequential};
  PerfParams perf;
  // failures
  bool failures_enabled = false;
  FailureRates rates;
  FailureProfile cn_profile, mn_profile;
  int failure_horizon_days = 1;
  std::uint64_t failure_seed = 7;
  // capacity economics
  double r_pct = 10.0;
  EconomicParams econ;
  CharacterizationOptions copts;
  // optimize / compare / place extras
  std::vector<int> n_values = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> m_values = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> unit_counts = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<std::string> mono_servers = {"so1s_1g"};
  std::vector<std::string> disagg_cns = {"cn_1g"};
  std::vector<std::string> disagg_mns = {"ddr_mn"};
  std::vector<int> generations = {0, 1, 2, 3, 4, 5};
  int n_replicas_override = 0;  // 0: computed
  int random_baseline_seeds = 100;
  int sim_max_batch = 128;
  double sim_max_wait_us = 2000.0;
  std::string trace_csv_path;          // import queries instead of generating
  std::string failure_trace_csv_path;  // replay a recorded incident pattern
  bool emit_latencies = false;
  bool emit_routing = false;
  bool emit_trace = false;
  bool emit_event_log = false;
  int threads = 1;
};

inline NodeConfig node_from_preset(const std::string& name, const Catalog& catalog) {
  if (name == "su2s") return make_su2s(catalog);
  if (name == "so1s_1g") return make_so1s(catalog, 1);
  if (name == "so1s_2g") return make_so1s(catalog, 2);
  if (name == "so1s_4g") return make_so1s(catalog, 4);
  if (name == "so1s_1g_nmp") return make_so1s(catalog, 1, true);
  if (name == "so1s_4g_nmp") return make_so1s(catalog, 4, true);
  if (name == "cn_1g") return make_cn(catalog, 1);
  if (name == "cn_4g") return make_cn(catalog, 4);
  if (name == "ddr_mn") return make_ddr_mn(catalog);
  if (name == "nmp_mn") return make_nmp_mn(catalog);
  throw ConfigError("unknown node preset \"" + name + "\"");
}

inline NodeConfig node_from_json(const json& j, const Catalog& catalog) {
  if (j.is_string()) return node_from_preset(j.get<std::string>(), catalog);
  check_keys(j, {"node_id", "node_class", "devices", "local_mem_bandwidth_gibps"}, "node");
  NodeConfig node;
  node.node_id = j.at("node_id").get<std::string>();
  const std::string cls = j.at("node_class").get<std::string>();
  if (cls == "cn")
    node.node_class = NodeClass::cn;
  else if (cls == "mn")
    node.node_class = NodeClass::mn;
  else if (cls == "monolithic")
    node.node_class = NodeClass::monolithic;
  else
    throw ConfigError("unknown node_class \"" + cls + "\"");
  for (const auto& [device_id, count] : j.at("devices").items())
    node.devices.emplace_back(device_id, count.get<int>());
  node.local_mem_bandwidth_gibps = j.at("local_mem_bandwidth_gibps").get<double>();
  finalize_node(node, catalog);
  return node;
}

inline LoadCurve curve_from_json(const json& j) {
  check_keys(j,
             {"kind", "qps", "duration_s", "interval_s", "peak_qps", "peak_hour",
              "trough_ratio", "hours", "rates_qps"},
             "workload.curve");
  const std::string kind = get_or<std::string>(j, "kind", "constant");
  if (kind == "constant")
    return constant_curve(j.at("qps").get<double>(), j.at("duration_s").get<double>(),
                          get_or(j, "interval_s", 600.0));
  if (kind == "diurnal")
    return diurnal_curve(j.at("peak_qps").get<double>(), get_or(j, "peak_hour", 20.0),
                         get_or(j, "trough_ratio", 0.5), get_or(j, "interval_s", 600.0),
                         get_or(j, "hours", 24.0));
  if (kind == "explicit") {
    LoadCurve c;
    c.interval_s = get_or(j, "interval_s", 600.0);
    c.rates_qps = j.at("rates_qps").get<std::vector<double>>();
    c.validate();
    return c;
  }
  throw ConfigError("unknown curve kind \"" + kind + "\"");
}

inline QuerySizeDist size_dist_from_json(const json& j) {
  check_keys(j, {"kind", "median_samples", "sigma_log", "min_samples", "max_samples", "samples"},
             "workload.size_dist");
  const std::string kind = get_or<std::string>(j, "kind", "lognormal");
  if (kind == "fixed") return fixed_size_dist(j.at("samples").get<int>());
  if (kind != "lognormal") throw ConfigError("unknown size_dist kind \"" + kind + "\"");
  QuerySizeDist d;
  d.mu_log = std::log(get_or(j, "median_samples", 32.0));
  d.sigma_log = get_or(j, "sigma_log", 1.2);
  d.min_samples = get_or(j, "min_samples", 1);
  d.max_samples = get_or(j, "max_samples", 4096);
  return d;
}

inline Deployment deployment_from_string(const std::string& s) {
  if (s == "disaggregated") return Deployment::disaggregated;
  if (s == "monolithic_scale_out") return Deployment::monolithic_scale_out;
  if (s == "scale_up_naive") return Deployment::scale_up_naive;
  if (s == "scale_up_numa_aware") return Deployment::scale_up_numa_aware;
  throw ConfigError("unknown deployment \"" + s + "\"");
}

inline SchedulerKind scheduler_from_string(const std::string& s) {
  if (s == "sequential") return SchedulerKind::sequential;
  if (s == "interleaved") return SchedulerKind::interleaved;
  throw ConfigError("unknown scheduler \"" + s + "\"");
}

// Parses, validates, and resolves an experiment config. `seed_override`
// (from --seed) replaces both workload and failure seeds when nonzero.
inline Experiment load_experiment(const json& root, std::uint64_t seed_override = 0,
                                  int threads_override = 0) {
  check_keys(root,
             {"model", "hardware", "workload", "sla_us", "scheduler", "schedulers", "perf",
              "failures", "capacity", "characterize", "optimize", "compare", "place",
              "simulate", "emit_latencies", "emit_routing", "emit_trace",
              "emit_event_log"},
             "config");
  Experiment exp;

  // hardware + catalog
  const json hw = root.value("hardware", json::object());
  check_keys(hw,
             {"device_overrides", "cn", "mn", "server", "n_cns", "m_mns", "deployment",
              "n_backup_cns", "n_backup_mns", "intra_unit_bandwidth_gibps"},
             "hardware");
  exp.catalog = build_default_catalog();
  if (hw.contains("device_overrides")) {
    for (const auto& [device_id, patch] : hw.at("device_overrides").items()) {
      auto it = exp.catalog.find(device_id);
      if (it == exp.catalog.end()) throw ConfigError("override of unknown device " + device_id);
      check_keys(patch, {"unit_price_usd", "tdp_watts", "capacity_gib", "peak_bandwidth_gibps"},
                 "device_overrides." + device_id);
      it->second.unit_price_usd = get_or(patch, "unit_price_usd", it->second.unit_price_usd);
      it->second.tdp_watts = get_or(patch, "tdp_watts", it->second.tdp_watts);
      it->second.capacity_gib = get_or(patch, "capacity_gib", it->second.capacity_gib);
      it->second.peak_bandwidth_gibps =
          get_or(patch, "peak_bandwidth_gibps", it->second.peak_bandwidth_gibps);
    }
  }
  const Deployment deployment =
      deployment_from_string(get_or<std::string>(hw, "deployment", "disaggregated"));
  NodeConfig cn, mn;
  if (deployment == Deployment::disaggregated) {
    cn = node_from_json(hw.value("cn", json("cn_1g")), exp.catalog);
    mn = node_from_json(hw.value("mn", json("ddr_mn")), exp.catalog);
  } else {
    cn = node_from_json(hw.value("server", json("so1s_1g")), exp.catalog);
    mn = cn;
  }
  const int n_cns = get_or(hw, "n_cns", 1);
  const int m_mns = deployment == Deployment::disaggregated ? get_or(hw, "m_mns", 1) : n_cns;
  exp.unit = make_unit_config(cn, n_cns, mn, m_mns, deployment);
  if (hw.contains("intra_unit_bandwidth_gibps"))
    exp.unit.intra_unit_bandwidth_gibps = hw.at("intra_unit_bandwidth_gibps").get<double>();
  exp.copts.n_backup_cns = get_or(hw, "n_backup_cns", 0);
  exp.copts.n_backup_mns = get_or(hw, "n_backup_mns", 0);

  // model
  const json mj = root.value("model", json::object());
  check_keys(mj,
             {"kind", "model_id", "total_bytes", "n_tables", "dims", "pooling_median",
              "pooling_sigma_log", "element_bytes", "dense_gflops_per_sample",
              "preprocess_us_per_sample", "seed", "series", "sparse_growth_total",
              "dense_growth_total", "num_generations", "generation", "path"},
             "model");
  const std::string model_kind = get_or<std::string>(mj, "kind", "synthetic");
  auto build_synthetic = [&](const std::string& default_id) {
    const auto total = get_or<std::uint64_t>(mj, "total_bytes", 8ull << 30);
    const int n_tables = get_or(mj, "n_tables", 64);
    const auto dims = get_or<std::vector<int>>(mj, "dims", {32, 64, 128});
    const double pooling_median = get_or(mj, "pooling_median", 80.0);
    const double sigma = get_or(mj, "pooling_sigma_log", 0.5);
    const auto seed = get_or<std::uint64_t>(mj, "seed", 1);
    ModelSpec m;
    m.model_id = get_or<std::string>(mj, "model_id", default_id);
    m.tables = synth_tables(total, n_tables, dims, std::log(pooling_median), sigma, seed,
                            get_or(mj, "element_bytes", 4));
    m.dense_gflops_per_sample = get_or(mj, "dense_gflops_per_sample", 0.01);
    m.preprocess_cost_us_per_sample =
        get_or(mj, "preprocess_us_per_sample", kPreprocessUsPerLookup * m.total_pooling());
    return m;
  };
  if (model_kind == "synthetic") {
    exp.model = std::make_shared<ModelSpec>(build_synthetic("synthetic"));
  } else if (model_kind == "file") {
    exp.model = std::make_shared<ModelSpec>(
        model_from_json(json::parse(read_file(mj.at("path").get<std::string>()))));
  } else if (model_kind == "series") {
    const std::string series_name = get_or<std::string>(mj, "series", "rm1");
    if (series_name == "rm1")
      exp.series = make_rm1_series(get_or<std::uint64_t>(mj, "seed", 1),
                                   get_or(mj, "n_tables", 1000));
    else if (series_name == "rm2")
      exp.series = make_rm2_series(get_or<std::uint64_t>(mj, "seed", 2),
                                   get_or(mj, "n_tables", 1000));
    else if (series_name == "custom") {
      exp.series.base = build_synthetic("custom");
      exp.series.sparse_growth_total = get_or(mj, "sparse_growth_total", 2.0);
      exp.series.dense_growth_total = get_or(mj, "dense_growth_total", 2.0);
      exp.series.num_generations = get_or(mj, "num_generations", 6);
    } else {
      throw ConfigError("unknown series \"" + series_name + "\"");
    }
    if (mj.contains("preprocess_us_per_sample"))
      exp.series.base.preprocess_cost_us_per_sample =
          mj.at("preprocess_us_per_sample").get<double>();
    if (mj.contains("dense_gflops_per_sample"))
      exp.series.base.dense_gflops_per_sample = mj.at("dense_gflops_per_sample").get<double>();
    exp.has_series = true;
    exp.model = std::make_shared<ModelSpec>(
        make_generation(exp.series, get_or(mj, "generation", 0)));
  } else {
    throw ConfigError("unknown model kind \"" + model_kind + "\"");
  }

  // workload
  const json wj = root.value("workload", json::object());
  check_keys(wj, {"curve", "size_dist", "seed", "trace_csv"}, "workload");
  exp.trace_csv_path = get_or<std::string>(wj, "trace_csv", "");
  exp.curve = curve_from_json(wj.value("curve", json{{"kind", "constant"},
                                                     {"qps", 100.0},
                                                     {"duration_s", 60.0}}));
  exp.size_dist = size_dist_from_json(wj.value("size_dist", json::object()));
  exp.workload_seed = get_or<std::uint64_t>(wj, "seed", 1);

  exp.sla_us = get_or(root, "sla_us", 100000.0);
  if (root.contains("schedulers")) {
    exp.schedulers.clear();
    for (const auto& s : root.at("schedulers"))
      exp.schedulers.push_back(scheduler_from_string(s.get<std::string>()));
  } else if (root.contains("scheduler")) {
    exp.schedulers = {scheduler_from_string(root.at("scheduler").get<std::string>())};
  }

  // perf
  const json pj = root.value("perf", json::object());
  check_keys(pj,
             {"gpu_effective_tflops", "per_message_latency_us", "idle_power_fraction",
              "numa_naive_local_gibps", "numa_naive_remote_gibps", "numa_aware_local_gibps",
              "upi_bandwidth_gibps", "upi_latency_us"},
             "perf");
  exp.perf.gpu_effective_tflops = get_or(pj, "gpu_effective_tflops", 20.0);
  exp.perf.network.per_message_latency_us = get_or(pj, "per_message_latency_us", 2.0);
  exp.perf.idle_power_fraction = get_or(pj, "idle_power_fraction", 0.3);
  exp.perf.numa.naive_local_gibps = get_or(pj, "numa_naive_local_gibps", 93.0);
  exp.perf.numa.naive_remote_gibps = get_or(pj, "numa_naive_remote_gibps", 52.0);
  exp.perf.numa.aware_local_gibps = get_or(pj, "numa_aware_local_gibps", 145.0);
  exp.perf.numa.upi.bandwidth_gibps = get_or(pj, "upi_bandwidth_gibps", 55.0);
  exp.perf.numa.upi.per_message_latency_us = get_or(pj, "upi_latency_us", 0.5);

  // failures
  const json fj = root.value("failures", json::object());
  check_keys(fj,
             {"enabled", "gpu_class_daily_pct", "cpu_class_daily_pct", "mn_class_daily_pct",
              "horizon_days", "migrate_delay_s", "routing_update_delay_s", "reinit_delay_s",
              "repair_delay_s", "seed", "trace_csv"},
             "failures");
  exp.failure_trace_csv_path = get_or<std::string>(fj, "trace_csv", "");
  exp.failures_enabled = get_or(fj, "enabled", false);
  exp.rates.gpu_class_daily_pct = get_or(fj, "gpu_class_daily_pct", 7.0);
  exp.rates.cpu_class_daily_pct = get_or(fj, "cpu_class_daily_pct", 0.4);
  exp.rates.mn_class_daily_pct = get_or(fj, "mn_class_daily_pct", 0.04);
  exp.failure_horizon_days = get_or(fj, "horizon_days", 1);
  exp.failure_seed = get_or<std::uint64_t>(fj, "seed", 7);
  exp.cn_profile = make_profile(exp.unit.cn.failure_class, exp.rates);
  exp.mn_profile = make_profile(
      exp.unit.deployment == Deployment::disaggregated ? exp.unit.mn.failure_class
                                                       : exp.unit.cn.failure_class,
      exp.rates);
  for (FailureProfile* p : {&exp.cn_profile, &exp.mn_profile}) {
    p->migrate_delay_s = get_or(fj, "migrate_delay_s", 30.0);
    p->routing_update_delay_s = get_or(fj, "routing_update_delay_s", 5.0);
    p->reinit_delay_s = get_or(fj, "reinit_delay_s", 600.0);
    p->repair_delay_s = get_or(fj, "repair_delay_s", 3600.0);
    p->validate();
  }

  // capacity economics
  const json cj = root.value("capacity", json::object());
  check_keys(cj, {"r_pct", "electricity_usd_per_kwh", "horizon_years"}, "capacity");
  exp.r_pct = get_or(cj, "r_pct", 10.0);
  exp.econ.electricity_usd_per_kwh = get_or(cj, "electricity_usd_per_kwh", 0.10);
  exp.econ.horizon_years = get_or(cj, "horizon_years", 3.0);

  // characterization
  const json kj = root.value("characterize", json::object());
  check_keys(kj,
             {"batch_candidates", "rate_grid_points", "trace_duration_s", "plateau_eps"},
             "characterize");
  exp.copts.batch_candidates =
      get_or<std::vector<int>>(kj, "batch_candidates", {32, 64, 128, 256});
  exp.copts.rate_grid_points = get_or(kj, "rate_grid_points", 128);
  exp.copts.trace_duration_s = get_or(kj, "trace_duration_s", 1.0);
  exp.copts.plateau_eps = get_or(kj, "plateau_eps", 0.01);
  exp.copts.sla_us = exp.sla_us;
  exp.copts.size_dist = exp.size_dist;
  exp.copts.scheduler = exp.schedulers.front();
  exp.copts.seed = exp.workload_seed;

  // optimize
  const json oj = root.value("optimize", json::object());
  check_keys(oj, {"n_values", "m_values"}, "optimize");
  exp.n_values = get_or<std::vector<int>>(oj, "n_values", exp.n_values);
  exp.m_values = get_or<std::vector<int>>(oj, "m_values", exp.m_values);

  // compare
  const json cmp = root.value("compare", json::object());
  check_keys(cmp, {"generations", "mono_servers", "disagg_cns", "disagg_mns", "unit_counts"},
             "compare");
  exp.generations = get_or<std::vector<int>>(cmp, "generations", exp.generations);
  exp.mono_servers = get_or<std::vector<std::string>>(cmp, "mono_servers", exp.mono_servers);
  exp.disagg_cns = get_or<std::vector<std::string>>(cmp, "disagg_cns", exp.disagg_cns);
  exp.disagg_mns = get_or<std::vector<std::string>>(cmp, "disagg_mns", exp.disagg_mns);
  exp.unit_counts = get_or<std::vector<int>>(cmp, "unit_counts", exp.unit_counts);

  // place
  const json plj = root.value("place", json::object());
  check_keys(plj, {"n_replicas", "random_baseline_seeds"}, "place");
  exp.n_replicas_override = get_or(plj, "n_replicas", 0);
  exp.random_baseline_seeds = get_or(plj, "random_baseline_seeds", 100);

  // simulate
  const json sj = root.value("simulate", json::object());
  check_keys(sj, {"max_batch", "max_wait_us"}, "simulate");
  exp.sim_max_batch = get_or(sj, "max_batch", 128);
  exp.sim_max_wait_us = get_or(sj, "max_wait_us", 2000.0);

  exp.emit_latencies = get_or(root, "emit_latencies", false);
  exp.emit_routing = get_or(root, "emit_routing", false);
  exp.emit_trace = get_or(root, "emit_trace", false);
  exp.emit_event_log = get_or(root, "emit_event_log", false);

  if (seed_override != 0) {
    exp.workload_seed = seed_override;
    exp.failure_seed = seed_override + 1;
    exp.copts.seed = seed_override;
  }
  if (threads_override > 0) exp.threads = threads_override;

  // resolved manifest: the input config with effective seeds attached
  exp.manifest = root;
  exp.manifest["resolved"] = {
      {"workload_seed", exp.workload_seed},
      {"failure_seed", exp.failure_seed},
      {"sla_us", exp.sla_us},
      {"r_pct", exp.r_pct},
      {"electricity_usd_per_kwh", exp.econ.electricity_usd_per_kwh},
      {"horizon_years", exp.econ.horizon_years},
      {"unit", exp.unit.cn.node_id + "x" + std::to_string(exp.unit.n_cns) + "+" +
                   exp.unit.mn.node_id + "x" + std::to_string(exp.unit.m_mns)},
      {"deployment", to_string(exp.unit.deployment)},
      {"model_id", exp.model->model_id},
      {"total_sparse_bytes", exp.model->total_sparse_bytes()},
  };
  return exp;
}

// Built-in experiment presets at desk scale. Each mirrors the shape of one
// of the source studies; absolute numbers are synthetic.
inline const std::map<std::string, json>& preset_configs() {
  static const std::map<std::string, json> presets = {
      {"demo-place",
       json::parse(R"({
         "model": {"total_bytes": 42949672960, "n_tables": 200, "seed": 3,
                    "preprocess_us_per_sample": 0.1},
         "hardware": {"m_mns": 4},
         "place": {"random_baseline_seeds": 25}
       })")},
      {"fig7d",
       json::parse(R"({
         "model": {"total_bytes": 3516328050688, "n_tables": 1000, "seed": 17,
                    "preprocess_us_per_sample": 0.1},
         "hardware": {"m_mns": 8},
         "place": {"n_replicas": 2, "random_baseline_seeds": 100}
       })")},
      {"demo-simulate",
       json::parse(R"({
         "model": {"total_bytes": 8589934592, "n_tables": 32, "seed": 5,
                    "dense_gflops_per_sample": 0.005, "preprocess_us_per_sample": 0.1},
         "hardware": {"n_cns": 2, "m_mns": 2},
         "workload": {"curve": {"kind": "constant", "qps": 500, "duration_s": 2.0},
                       "size_dist": {"kind": "lognormal", "median_samples": 32}, "seed": 1}
       })")},
      {"fig8b",
       json::parse(R"({
         "model": {"total_bytes": 8589934592, "n_tables": 32, "seed": 5,
                    "dense_gflops_per_sample": 0.002, "preprocess_us_per_sample": 0.05},
         "hardware": {"n_cns": 2, "m_mns": 2},
         "schedulers": ["sequential", "interleaved"],
         "sla_us": 3000,
         "workload": {"size_dist": {"kind": "lognormal", "median_samples": 32}, "seed": 2},
         "characterize": {"batch_candidates": [32, 64, 128, 256],
                           "rate_grid_points": 160, "trace_duration_s": 1.0}
       })")},
      {"demo-failures",
       json::parse(R"({
         "model": {"total_bytes": 8589934592, "n_tables": 32, "seed": 5,
                    "dense_gflops_per_sample": 0.005, "preprocess_us_per_sample": 0.1},
         "hardware": {"n_cns": 2, "m_mns": 4, "n_backup_cns": 1, "n_backup_mns": 1},
         "workload": {"curve": {"kind": "diurnal", "peak_qps": 40, "interval_s": 600},
                       "size_dist": {"kind": "lognormal", "median_samples": 16}, "seed": 4},
         "failures": {"enabled": true, "horizon_days": 1, "seed": 11,
                       "gpu_class_daily_pct": 60, "mn_class_daily_pct": 40}
       })")},
      {"fig10",
       json::parse(R"({
         "model": {"total_bytes": 1649267441664, "n_tables": 64, "seed": 9,
                    "pooling_median": 200, "dims": [64, 128],
                    "dense_gflops_per_sample": 0.001, "preprocess_us_per_sample": 0.02},
         "hardware": {"cn": "cn_1g", "mn": "ddr_mn"},
         "workload": {"curve": {"kind": "diurnal", "peak_qps": 2000, "interval_s": 600},
                       "size_dist": {"kind": "lognormal", "median_samples": 32}, "seed": 3},
         "characterize": {"batch_candidates": [64, 128, 256],
                           "rate_grid_points": 96, "trace_duration_s": 0.5},
         "optimize": {"n_values": [1,2,3,4,5,6,7,8], "m_values": [1,2,3,4,5,6,7,8]}
       })")},
      {"fig11",
       json::parse(R"({
         "model": {"kind": "series", "series": "custom", "model_id": "rm1-desk",
                    "total_bytes": 824633720832, "n_tables": 48, "seed": 13,
                    "pooling_median": 150, "dims": [64, 128],
                    "sparse_growth_total": 5.571428571428571, "dense_growth_total": 2.0,
                    "dense_gflops_per_sample": 0.001, "preprocess_us_per_sample": 0.02},
         "workload": {"curve": {"kind": "diurnal", "peak_qps": 20000, "interval_s": 600},
                       "size_dist": {"kind": "lognormal", "median_samples": 32}, "seed": 6},
         "characterize": {"batch_candidates": [64, 128],
                           "rate_grid_points": 64, "trace_duration_s": 0.4},
         "compare": {"generations": [0, 1, 2], "mono_servers": ["so1s_1g"],
                      "disagg_cns": ["cn_1g"], "disagg_mns": ["ddr_mn"],
                      "unit_counts": [1, 2, 3, 4, 5, 6]}
       })")},
      {"fig12",
       json::parse(R"({
         "model": {"kind": "series", "series": "custom", "model_id": "rm1-desk",
                    "total_bytes": 824633720832, "n_tables": 48, "seed": 13,
                    "pooling_median": 150, "dims": [64, 128],
                    "sparse_growth_total": 5.571428571428571, "dense_growth_total": 2.0,
                    "dense_gflops_per_sample": 0.001, "preprocess_us_per_sample": 0.02},
         "workload": {"curve": {"kind": "diurnal", "peak_qps": 20000, "interval_s": 600},
                       "size_dist": {"kind": "lognormal", "median_samples": 32}, "seed": 6},
         "characterize": {"batch_candidates": [64, 128],
                           "rate_grid_points": 64, "trace_duration_s": 0.4},
         "compare": {"generations": [0, 1, 2],
                      "mono_servers": ["so1s_1g", "so1s_1g_nmp"],
                      "disagg_cns": ["cn_1g"], "disagg_mns": ["ddr_mn", "nmp_mn"],
                      "unit_counts": [1, 2, 3, 4, 5, 6]}
       })")},
      {"demo-plan",
       json::parse(R"({
         "model": {"total_bytes": 8589934592, "n_tables": 32, "seed": 5,
                    "dense_gflops_per_sample": 0.005, "preprocess_us_per_sample": 0.1},
         "hardware": {"n_cns": 2, "m_mns": 2},
         "workload": {"curve": {"kind": "diurnal", "peak_qps": 10000, "interval_s": 600},
                       "size_dist": {"kind": "lognormal", "median_samples": 32}, "seed": 1},
         "characterize": {"batch_candidates": [64, 128], "trace_duration_s": 0.4}
       })")},
  };
  return presets;
}

}  // namespace disaggsim
