#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "disaggsim/capacity.hpp"
#include "disaggsim/failures.hpp"
#include "disaggsim/model.hpp"
#include "disaggsim/placement.hpp"
#include "disaggsim/simcore.hpp"
#include "disaggsim/workload.hpp"

namespace disaggsim {

using nlohmann::json;

// Write-temp-rename so partially written outputs are never observed.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- JSON views -----------------------------------------------------------------

inline json to_json(const EmbeddingTable& t) {
  return json{{"table_id", t.table_id},
              {"num_rows", t.num_rows},
              {"dim", t.dim},
              {"element_bytes", t.element_bytes},
              {"avg_pooling_factor", t.avg_pooling_factor}};
}

inline EmbeddingTable table_from_json(const json& j) {
  EmbeddingTable t;
  t.table_id = j.at("table_id").get<int>();
  t.num_rows = j.at("num_rows").get<std::uint64_t>();
  t.dim = j.at("dim").get<int>();
  t.element_bytes = j.value("element_bytes", 4);
  t.avg_pooling_factor = j.at("avg_pooling_factor").get<double>();
  return t;
}

inline json to_json(const ModelSpec& m) {
  json tables = json::array();
  for (const auto& t : m.tables) tables.push_back(to_json(t));
  return json{{"model_id", m.model_id},
              {"tables", std::move(tables)},
              {"dense_gflops_per_sample", m.dense_gflops_per_sample},
              {"preprocess_cost_us_per_sample", m.preprocess_cost_us_per_sample},
              {"total_sparse_bytes", m.total_sparse_bytes()}};
}

inline ModelSpec model_from_json(const json& j) {
  ModelSpec m;
  m.model_id = j.at("model_id").get<std::string>();
  for (const auto& t : j.at("tables")) m.tables.push_back(table_from_json(t));
  m.dense_gflops_per_sample = j.at("dense_gflops_per_sample").get<double>();
  m.preprocess_cost_us_per_sample = j.at("preprocess_cost_us_per_sample").get<double>();
  return m;
}

inline json to_json(const PlacementPlan& plan) {
  json assignments = json::object();
  for (const auto& [table_id, replicas] : plan.assignments)
    assignments[std::to_string(table_id)] = replicas;
  json residual = json::object();
  for (const auto& [mn, bytes] : plan.residual_capacity)
    residual[std::to_string(mn)] = bytes;
  return json{{"n_replicas", plan.n_replicas},
              {"assignments", std::move(assignments)},
              {"residual_capacity_bytes", std::move(residual)}};
}

inline json to_json(const RoutingTable& rt) {
  json entries = json::array();
  for (const auto& e : rt.entries)
    entries.push_back(json{{"task_id", e.task_id},
                           {"table_id", e.table_id},
                           {"dest_mn", e.dest_mn}});
  json load = json::object();
  for (const auto& [mn, w] : rt.routed_load) load[std::to_string(mn)] = w;
  return json{{"entries", std::move(entries)}, {"routed_load", std::move(load)}};
}

inline json to_json(const SimResult& r, bool include_latencies = false) {
  json out{{"p95_latency_us", r.p95_latency_us},
           {"achieved_qps", r.achieved_qps},
           {"energy_joules", r.energy_joules},
           {"completed_queries", r.completed_queries},
           {"total_queries", r.total_queries},
           {"total_batches", r.total_batches},
           {"horizon_us", r.horizon_us},
           {"sla_us", r.sla_us},
           {"sla_violations", r.sla_violations},
           {"busy_fractions", r.busy_fractions}};
  if (include_latencies) out["per_query_latency_us"] = r.per_query_latency_us;
  return out;
}

inline json to_json(const CharacterizationEntry& e) {
  return json{{"model_id", e.model_id},
              {"unit_config_id", e.unit_config_id},
              {"qps", e.qps},
              {"peak_power_w", e.peak_power_w},
              {"best_batch", e.best_batch}};
}

inline json to_json(const HillClimbResult& hc) {
  json points = json::array();
  for (const auto& p : hc.points)
    points.push_back(json{{"batch", p.batch},
                          {"rate_qps", p.rate_qps},
                          {"qps", p.qps},
                          {"p95_us", p.p95_us}});
  return json{{"best_qps", hc.best_qps},
              {"best_batch", hc.best_batch},
              {"points", std::move(points)},
              {"diagnostic", hc.diagnostic}};
}

inline json to_json(const AllocationPlan& plan) {
  return json{{"n_t", plan.n_t},        {"n_peak", plan.n_peak},
              {"p_t_watts", plan.p_t},  {"r_pct", plan.r_pct},
              {"capex_usd", plan.capex_usd}, {"opex_usd", plan.opex_usd},
              {"tco_usd", plan.tco_usd}};
}

inline json to_json(const GridResult& grid) {
  json cells = json::array();
  for (const auto& c : grid.cells)
    cells.push_back(json{{"n", c.n},
                         {"m", c.m},
                         {"feasible", c.feasible},
                         {"qps", c.qps},
                         {"power_w", c.power_w},
                         {"tco_usd", c.tco_usd},
                         {"best_batch", c.best_batch},
                         {"n_peak", c.n_peak},
                         {"note", c.note}});
  return json{{"cells", std::move(cells)},
              {"opt_n", grid.opt_n},
              {"opt_m", grid.opt_m},
              {"opt_tco_usd", grid.opt_tco_usd}};
}

inline json to_json(const ComparisonReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back(json{{"generation", r.generation},
                        {"model_id", r.model_id},
                        {"mono_config", r.mono_config},
                        {"mono_tco_usd", r.mono_tco_usd},
                        {"disagg_config", r.disagg_config},
                        {"disagg_tco_usd", r.disagg_tco_usd},
                        {"savings_pct", r.savings_pct},
                        {"failure_share_pct", r.failure_share_pct},
                        {"utilization_share_pct", r.utilization_share_pct}});
  return json{{"rows", std::move(rows)},
              {"mono_total_usd", report.mono_total_usd},
              {"disagg_total_usd", report.disagg_total_usd},
              {"total_savings_pct", report.total_savings_pct}};
}

// --- CSV ------------------------------------------------------------------------

namespace csvfmt {
inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}
}  // namespace csvfmt

// Trace files: query_id,arrival_time_us,num_samples
inline std::string trace_to_csv(const std::vector<Query>& trace,
                                const std::string& manifest_line = "") {
  std::ostringstream out;
  if (!manifest_line.empty()) out << "# " << manifest_line << "\n";
  out << "query_id,arrival_time_us,num_samples\n";
  for (const auto& q : trace)
    out << q.query_id << "," << csvfmt::num(q.arrival_time_us) << "," << q.num_samples
        << "\n";
  return out.str();
}

inline std::vector<Query> trace_from_csv(const std::string& text) {
  std::vector<Query> trace;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("query_id", 0) == 0) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw ConfigError("bad trace row: " + line);
    Query q;
    q.query_id = std::stoull(line.substr(0, c1));
    q.arrival_time_us = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    q.num_samples = std::stoi(line.substr(c2 + 1));
    trace.push_back(q);
  }
  return trace;
}

// Failure trace files: time_us,node_id,kind
inline std::string failure_trace_to_csv(const FailureTrace& trace,
                                        const std::string& manifest_line = "") {
  std::ostringstream out;
  if (!manifest_line.empty()) out << "# " << manifest_line << "\n";
  out << "time_us,node_id,kind\n";
  for (const auto& e : trace.events)
    out << csvfmt::num(e.time_us) << "," << e.node_id << ","
        << (e.kind == FailureKind::fail ? "fail" : "recover") << "\n";
  return out.str();
}

inline FailureTrace failure_trace_from_csv(const std::string& text) {
  FailureTrace trace;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("time_us", 0) == 0) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw ConfigError("bad failure row: " + line);
    FailureEvent e;
    e.time_us = std::stod(line.substr(0, c1));
    e.node_id = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string kind = line.substr(c2 + 1);
    if (kind == "fail")
      e.kind = FailureKind::fail;
    else if (kind == "recover")
      e.kind = FailureKind::recover;
    else
      throw ConfigError("bad failure kind: " + kind);
    trace.events.push_back(std::move(e));
  }
  trace.validate();
  return trace;
}

// Grid heatmap: n,m,qps,power_w,tco_usd
inline std::string grid_to_csv(const GridResult& grid, const std::string& manifest_line = "") {
  std::ostringstream out;
  if (!manifest_line.empty()) out << "# " << manifest_line << "\n";
  out << "n,m,qps,power_w,tco_usd\n";
  for (const auto& c : grid.cells) {
    out << c.n << "," << c.m << ",";
    if (c.feasible)
      out << csvfmt::num(c.qps) << "," << csvfmt::num(c.power_w) << ","
          << csvfmt::num(c.tco_usd);
    else
      out << ",,";
    out << "\n";
  }
  return out.str();
}

inline std::string comparison_to_csv(const ComparisonReport& report,
                                     const std::string& manifest_line = "") {
  std::ostringstream out;
  if (!manifest_line.empty()) out << "# " << manifest_line << "\n";
  out << "generation,model_id,mono_config,mono_tco_usd,disagg_config,disagg_tco_usd,"
         "savings_pct,failure_share_pct,utilization_share_pct\n";
  for (const auto& r : report.rows)
    out << r.generation << "," << r.model_id << "," << r.mono_config << ","
        << csvfmt::num(r.mono_tco_usd) << "," << r.disagg_config << ","
        << csvfmt::num(r.disagg_tco_usd) << "," << csvfmt::num(r.savings_pct) << ","
        << csvfmt::num(r.failure_share_pct) << "," << csvfmt::num(r.utilization_share_pct)
        << "\n";
  return out.str();
}

inline std::string allocation_to_csv(const LoadCurve& curve, const AllocationPlan& plan,
                                     const std::string& manifest_line = "") {
  std::ostringstream out;
  if (!manifest_line.empty()) out << "# " << manifest_line << "\n";
  out << "interval,load_qps,n_units,power_w\n";
  for (std::size_t i = 0; i < plan.n_t.size(); ++i)
    out << i << "," << csvfmt::num(curve.rates_qps[i]) << "," << plan.n_t[i] << ","
        << csvfmt::num(plan.p_t[i]) << "\n";
  return out.str();
}

}  // namespace disaggsim
