#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "disaggsim/common.hpp"

namespace disaggsim {

enum class DeviceKind { cpu, gpu, dimm, nmp_dimm, nic, asic };

inline bool is_dimm_kind(DeviceKind k) {
  return k == DeviceKind::dimm || k == DeviceKind::nmp_dimm;
}

// One catalog row: a purchasable device with its price point and TDP.
// Prices are mid-range points of the market ranges; every field can be
// overridden from the hardware config section.
struct DeviceSpec {
  std::string device_id;
  DeviceKind kind = DeviceKind::cpu;
  double unit_price_usd = 0;
  double tdp_watts = 0;
  double capacity_gib = 0;          // dimm kinds only
  double peak_bandwidth_gibps = 0;  // dimm kinds only
};

using Catalog = std::map<std::string, DeviceSpec>;

// Commodity device catalog. The NMP part is priced at 2x the matching DDR
// DIMM and modeled at 4x its effective bandwidth; the MN-side ASIC is a
// defaulted price with a 23.9 W power envelope.
inline Catalog build_default_catalog() {
  Catalog c;
  auto put = [&c](DeviceSpec d) { c.emplace(d.device_id, std::move(d)); };
  put({"icelake", DeviceKind::cpu, 4500.0, 270.0, 0, 0});
  put({"cooperlake", DeviceKind::cpu, 2500.0, 86.0, 0, 0});
  put({"a100", DeviceKind::gpu, 13500.0, 400.0, 0, 0});
  put({"dimm_ddr4_16g", DeviceKind::dimm, 80.0, 5.0, 16.0, 17.88});
  put({"dimm_ddr4_64g", DeviceKind::dimm, 350.0, 24.0, 64.0, 23.84});
  put({"dimm_nmp_64g", DeviceKind::nmp_dimm, 700.0, 24.0, 64.0, 4 * 23.84});
  put({"nic_cx6", DeviceKind::nic, 2500.0, 20.0, 0, 0});
  put({"mn_asic", DeviceKind::asic, 1000.0, 23.9, 0, 0});
  return c;
}

enum class NodeClass { cn, mn, monolithic };
enum class FailureClass { gpu_class, cpu_class, mn_class };

inline const char* to_string(NodeClass c) {
  switch (c) {
    case NodeClass::cn: return "cn";
    case NodeClass::mn: return "mn";
    default: return "monolithic";
  }
}

inline const char* to_string(FailureClass c) {
  switch (c) {
    case FailureClass::gpu_class: return "gpu_class";
    case FailureClass::cpu_class: return "cpu_class";
    default: return "mn_class";
  }
}

// Hardware composition of one node. `devices` is a (device_id, count)
// multiset; capacity and failure class are derived in finalize().
struct NodeConfig {
  std::string node_id;
  NodeClass node_class = NodeClass::monolithic;
  std::vector<std::pair<std::string, int>> devices;
  FailureClass failure_class = FailureClass::cpu_class;
  double memory_capacity_gib = 0;       // derived
  double local_mem_bandwidth_gibps = 0; // preset default, overridable

  std::uint64_t memory_capacity_bytes() const {
    return static_cast<std::uint64_t>(memory_capacity_gib * kGiB);
  }
};

inline const DeviceSpec& resolve_device(const Catalog& catalog, const std::string& id) {
  auto it = catalog.find(id);
  if (it == catalog.end()) throw ConfigError("unknown device_id: " + id);
  return it->second;
}

inline int count_of_kind(const NodeConfig& node, const Catalog& catalog, DeviceKind kind) {
  int n = 0;
  for (const auto& [id, count] : node.devices)
    if (resolve_device(catalog, id).kind == kind) n += count;
  return n;
}

inline int gpu_count(const NodeConfig& node, const Catalog& catalog) {
  return count_of_kind(node, catalog, DeviceKind::gpu);
}

inline bool has_nmp_memory(const NodeConfig& node, const Catalog& catalog) {
  return count_of_kind(node, catalog, DeviceKind::nmp_dimm) > 0;
}

// Sum of device prices. Linear in counts by construction.
inline double node_capex(const NodeConfig& node, const Catalog& catalog) {
  double usd = 0;
  for (const auto& [id, count] : node.devices)
    usd += resolve_device(catalog, id).unit_price_usd * count;
  return usd;
}

// Sum of device TDPs (the MN ASIC row carries its measured 23.9 W).
inline double node_peak_power(const NodeConfig& node, const Catalog& catalog) {
  double watts = 0;
  for (const auto& [id, count] : node.devices)
    watts += resolve_device(catalog, id).tdp_watts * count;
  return watts;
}

// Derives memory capacity and failure class, and validates composition.
// MN composition rule: no GPUs, exactly one back-end NIC and one ASIC.
inline void finalize_node(NodeConfig& node, const Catalog& catalog) {
  node.memory_capacity_gib = 0;
  for (const auto& [id, count] : node.devices) {
    const DeviceSpec& d = resolve_device(catalog, id);
    if (is_dimm_kind(d.kind)) node.memory_capacity_gib += d.capacity_gib * count;
  }
  if (node.node_class == NodeClass::mn) {
    if (gpu_count(node, catalog) != 0)
      throw ConfigError("memory node " + node.node_id + " must not carry GPUs");
    if (count_of_kind(node, catalog, DeviceKind::nic) != 1 ||
        count_of_kind(node, catalog, DeviceKind::asic) != 1)
      throw ConfigError("memory node " + node.node_id +
                        " needs exactly one back-end NIC and one ASIC");
    node.failure_class = FailureClass::mn_class;
  } else {
    node.failure_class = gpu_count(node, catalog) > 0 ? FailureClass::gpu_class
                                                      : FailureClass::cpu_class;
  }
}

// --- Table 1 presets -------------------------------------------------------
// Default local-memory bandwidths: 145 GiB/s per IceLake socket, 4x that for
// NMP memory, and 60 GiB/s for the 4-channel DDR4-2400 CooperLake CN.

inline NodeConfig make_su2s(const Catalog& catalog) {
  NodeConfig n{"su2s", NodeClass::monolithic,
               {{"icelake", 2}, {"dimm_ddr4_64g", 32}, {"a100", 8}, {"nic_cx6", 2}},
               FailureClass::gpu_class, 0, 145.0};
  finalize_node(n, catalog);
  return n;
}

inline NodeConfig make_so1s(const Catalog& catalog, int n_gpus, bool nmp_memory = false) {
  const std::string dimm = nmp_memory ? "dimm_nmp_64g" : "dimm_ddr4_64g";
  NodeConfig n{std::string("so1s_") + std::to_string(n_gpus) + "g" + (nmp_memory ? "_nmp" : ""),
               NodeClass::monolithic,
               {{"icelake", 1}, {dimm, 16}, {"a100", n_gpus}, {"nic_cx6", 2}},
               FailureClass::gpu_class, 0, nmp_memory ? 4 * 145.0 : 145.0};
  finalize_node(n, catalog);
  return n;
}

inline NodeConfig make_cn(const Catalog& catalog, int n_gpus) {
  NodeConfig n{std::string("cn_") + std::to_string(n_gpus) + "g", NodeClass::cn,
               {{"cooperlake", 1}, {"dimm_ddr4_16g", 4}, {"a100", n_gpus}, {"nic_cx6", 2}},
               FailureClass::gpu_class, 0, 60.0};
  finalize_node(n, catalog);
  return n;
}

inline NodeConfig make_ddr_mn(const Catalog& catalog) {
  NodeConfig n{"ddr_mn", NodeClass::mn,
               {{"mn_asic", 1}, {"dimm_ddr4_64g", 16}, {"nic_cx6", 1}},
               FailureClass::mn_class, 0, 145.0};
  finalize_node(n, catalog);
  return n;
}

inline NodeConfig make_nmp_mn(const Catalog& catalog) {
  NodeConfig n{"nmp_mn", NodeClass::mn,
               {{"mn_asic", 1}, {"dimm_nmp_64g", 16}, {"nic_cx6", 1}},
               FailureClass::mn_class, 0, 4 * 145.0};
  finalize_node(n, catalog);
  return n;
}

enum class Deployment {
  disaggregated,
  monolithic_scale_out,
  scale_up_naive,
  scale_up_numa_aware
};

inline const char* to_string(Deployment d) {
  switch (d) {
    case Deployment::disaggregated: return "disaggregated";
    case Deployment::monolithic_scale_out: return "monolithic_scale_out";
    case Deployment::scale_up_naive: return "scale_up_naive";
    default: return "scale_up_numa_aware";
  }
}

inline bool is_scale_up(Deployment d) {
  return d == Deployment::scale_up_naive || d == Deployment::scale_up_numa_aware;
}

// Peak intra-unit link rate: back-end network for disaggregated/scale-out
// units, UPI for the scale-up ones.
inline double default_intra_unit_bandwidth(Deployment d) {
  return is_scale_up(d) ? 55.0 : 25.0;
}

// One serving unit: {n CNs, m MNs}, or n bundled servers when monolithic
// (then cn == mn describes the server and m_mns == n_cns).
struct ServingUnitConfig {
  NodeConfig cn;
  int n_cns = 1;
  NodeConfig mn;
  int m_mns = 1;
  double intra_unit_bandwidth_gibps = 25.0;
  Deployment deployment = Deployment::disaggregated;

  void validate() const {
    if (n_cns < 1 || m_mns < 1)
      throw ConfigError("serving unit needs n_cns >= 1 and m_mns >= 1");
    if (deployment != Deployment::disaggregated && m_mns != n_cns)
      throw ConfigError("monolithic deployments require m_mns == n_cns");
  }
};

inline ServingUnitConfig make_unit_config(NodeConfig cn, int n, NodeConfig mn, int m,
                                          Deployment d) {
  ServingUnitConfig u{std::move(cn), n, std::move(mn), m,
                      default_intra_unit_bandwidth(d), d};
  u.validate();
  return u;
}

// Acquisition cost of one unit; bundled servers are counted once.
inline double unit_capex(const ServingUnitConfig& u, const Catalog& catalog) {
  if (u.deployment == Deployment::disaggregated)
    return u.n_cns * node_capex(u.cn, catalog) + u.m_mns * node_capex(u.mn, catalog);
  return u.n_cns * node_capex(u.cn, catalog);
}

// Peak power draw of one unit (every component at TDP).
inline double unit_peak_power(const ServingUnitConfig& u, const Catalog& catalog) {
  if (u.deployment == Deployment::disaggregated)
    return u.n_cns * node_peak_power(u.cn, catalog) +
           u.m_mns * node_peak_power(u.mn, catalog);
  return u.n_cns * node_peak_power(u.cn, catalog);
}

}  // namespace disaggsim
