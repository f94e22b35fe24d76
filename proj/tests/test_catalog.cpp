#include <gtest/gtest.h>

#include "disaggsim/catalog.hpp"

namespace disaggsim {
namespace {

TEST(Catalog, DefaultCatalogRows) {
  const Catalog c = build_default_catalog();
  // Seven commodity rows plus the MN-side ASIC.
  EXPECT_EQ(c.size(), 8u);
  EXPECT_DOUBLE_EQ(c.at("a100").tdp_watts, 400.0);
  EXPECT_DOUBLE_EQ(c.at("a100").unit_price_usd, 13500.0);  // midpoint of 12k..15k
  EXPECT_DOUBLE_EQ(c.at("dimm_ddr4_64g").unit_price_usd, 350.0);
  EXPECT_DOUBLE_EQ(c.at("dimm_ddr4_64g").tdp_watts, 24.0);
  EXPECT_DOUBLE_EQ(c.at("dimm_nmp_64g").unit_price_usd,
                   2.0 * c.at("dimm_ddr4_64g").unit_price_usd);
  EXPECT_DOUBLE_EQ(c.at("icelake").unit_price_usd, 4500.0);
  EXPECT_DOUBLE_EQ(c.at("cooperlake").unit_price_usd, 2500.0);
  EXPECT_DOUBLE_EQ(c.at("nic_cx6").unit_price_usd, 2500.0);
  EXPECT_DOUBLE_EQ(c.at("mn_asic").tdp_watts, 23.9);
  for (const auto& [id, d] : c) {
    EXPECT_GT(d.unit_price_usd, 0) << id;
    EXPECT_GT(d.tdp_watts, 0) << id;
    EXPECT_EQ(d.capacity_gib > 0, is_dimm_kind(d.kind)) << id;
  }
}

TEST(Catalog, DefaultCatalogIsDeterministic) {
  const Catalog a = build_default_catalog();
  const Catalog b = build_default_catalog();
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [id, d] : a) {
    EXPECT_DOUBLE_EQ(d.unit_price_usd, b.at(id).unit_price_usd);
    EXPECT_DOUBLE_EQ(d.tdp_watts, b.at(id).tdp_watts);
  }
}

TEST(Catalog, NodeCapexEmptyDeviceList) {
  const Catalog c = build_default_catalog();
  NodeConfig empty{"empty", NodeClass::cn, {}, FailureClass::cpu_class, 0, 60.0};
  EXPECT_DOUBLE_EQ(node_capex(empty, c), 0.0);
  EXPECT_DOUBLE_EQ(node_peak_power(empty, c), 0.0);
}

TEST(Catalog, NodeCapexHandSummed) {
  const Catalog c = build_default_catalog();
  // DDR-MN: 1 ASIC + 16 x 64GB DIMM + 1 NIC = 1000 + 16*350 + 2500.
  const NodeConfig mn = make_ddr_mn(c);
  EXPECT_DOUBLE_EQ(node_capex(mn, c), 1000.0 + 16 * 350.0 + 2500.0);
  EXPECT_DOUBLE_EQ(node_capex(mn, c), 9100.0);
  // CN Type II: CooperLake + 4 x 16GB DIMM + 1 A100 + 2 NICs.
  const NodeConfig cn = make_cn(c, 1);
  EXPECT_DOUBLE_EQ(node_capex(cn, c), 2500.0 + 4 * 80.0 + 13500.0 + 2 * 2500.0);
  EXPECT_DOUBLE_EQ(node_capex(cn, c), 21320.0);
}

TEST(Catalog, NodePowerHandSummed) {
  const Catalog c = build_default_catalog();
  // DDR-MN: 23.9 W ASIC + 16 x 24 W DIMMs + 20 W NIC.
  EXPECT_DOUBLE_EQ(node_peak_power(make_ddr_mn(c), c), 23.9 + 16 * 24.0 + 20.0);
  EXPECT_DOUBLE_EQ(node_peak_power(make_ddr_mn(c), c), 427.9);
  // SU-2S: 2 x 270 W CPUs + 32 x 24 W DIMMs + 8 x 400 W GPUs + 2 x 20 W NICs.
  EXPECT_DOUBLE_EQ(node_peak_power(make_su2s(c), c),
                   2 * 270.0 + 32 * 24.0 + 8 * 400.0 + 2 * 20.0);
  EXPECT_DOUBLE_EQ(node_peak_power(make_su2s(c), c), 4548.0);
}

TEST(Catalog, UnknownDeviceIsConfigError) {
  const Catalog c = build_default_catalog();
  NodeConfig bad{"bad", NodeClass::cn, {{"quantum_fpu", 1}}, FailureClass::cpu_class, 0, 0};
  EXPECT_THROW(node_capex(bad, c), ConfigError);
  EXPECT_THROW(node_peak_power(bad, c), ConfigError);
}

TEST(Catalog, CapexAndPowerAreLinearInCounts) {
  const Catalog c = build_default_catalog();
  NodeConfig node = make_so1s(c, 4);
  NodeConfig doubled = node;
  for (auto& [id, count] : doubled.devices) count *= 2;
  EXPECT_DOUBLE_EQ(node_capex(doubled, c), 2.0 * node_capex(node, c));
  EXPECT_DOUBLE_EQ(node_peak_power(doubled, c), 2.0 * node_peak_power(node, c));
}

TEST(Catalog, PresetMemoryCapacitiesMatchTable) {
  const Catalog c = build_default_catalog();
  EXPECT_DOUBLE_EQ(make_so1s(c, 1).memory_capacity_gib, 8 * 2 * 64.0);  // 1 TB
  EXPECT_DOUBLE_EQ(make_su2s(c).memory_capacity_gib, 2 * 8 * 2 * 64.0);  // 2 TB
  EXPECT_DOUBLE_EQ(make_ddr_mn(c).memory_capacity_gib, 1024.0);
  EXPECT_DOUBLE_EQ(make_nmp_mn(c).memory_capacity_gib, 1024.0);
  EXPECT_DOUBLE_EQ(make_cn(c, 1).memory_capacity_gib, 64.0);
}

TEST(Catalog, FailureClassDerivation) {
  const Catalog c = build_default_catalog();
  EXPECT_EQ(make_su2s(c).failure_class, FailureClass::gpu_class);
  EXPECT_EQ(make_cn(c, 4).failure_class, FailureClass::gpu_class);
  EXPECT_EQ(make_ddr_mn(c).failure_class, FailureClass::mn_class);
  NodeConfig cpu_only{"cpu_only", NodeClass::cn,
                      {{"cooperlake", 1}, {"dimm_ddr4_16g", 4}, {"nic_cx6", 2}},
                      FailureClass::gpu_class, 0, 60.0};
  finalize_node(cpu_only, c);
  EXPECT_EQ(cpu_only.failure_class, FailureClass::cpu_class);
}

TEST(Catalog, MnCompositionRules) {
  const Catalog c = build_default_catalog();
  NodeConfig bad{"bad_mn", NodeClass::mn,
                 {{"mn_asic", 1}, {"dimm_ddr4_64g", 16}, {"nic_cx6", 1}, {"a100", 1}},
                 FailureClass::mn_class, 0, 145.0};
  EXPECT_THROW(finalize_node(bad, c), ConfigError);
  NodeConfig no_asic{"no_asic", NodeClass::mn,
                     {{"dimm_ddr4_64g", 16}, {"nic_cx6", 1}}, FailureClass::mn_class, 0, 145.0};
  EXPECT_THROW(finalize_node(no_asic, c), ConfigError);
}

TEST(Catalog, UnitDefaultsAndCapex) {
  const Catalog c = build_default_catalog();
  auto disagg = make_unit_config(make_cn(c, 1), 2, make_ddr_mn(c), 4,
                                 Deployment::disaggregated);
  EXPECT_DOUBLE_EQ(disagg.intra_unit_bandwidth_gibps, 25.0);
  EXPECT_DOUBLE_EQ(unit_capex(disagg, c), 2 * 21320.0 + 4 * 9100.0);

  auto scale_up = make_unit_config(make_su2s(c), 1, make_su2s(c), 1,
                                   Deployment::scale_up_numa_aware);
  EXPECT_DOUBLE_EQ(scale_up.intra_unit_bandwidth_gibps, 55.0);
  // Bundled server counted once.
  EXPECT_DOUBLE_EQ(unit_capex(scale_up, c), node_capex(make_su2s(c), c));

  EXPECT_THROW(make_unit_config(make_so1s(c, 1), 2, make_so1s(c, 1), 3,
                                Deployment::monolithic_scale_out),
               ConfigError);
}

}  // namespace
}  // namespace disaggsim
