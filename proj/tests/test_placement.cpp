#include <gtest/gtest.h>

#include <cmath>

#include "disaggsim/placement.hpp"

namespace disaggsim {
namespace {

std::vector<EmbeddingTable> equal_tables(int n, std::uint64_t bytes_each, int dim = 64) {
  std::vector<EmbeddingTable> tables;
  const auto rows = bytes_each / static_cast<std::uint64_t>(dim * 4);
  for (int i = 0; i < n; ++i) tables.push_back({i, rows, dim, 4, 80.0});
  return tables;
}

std::vector<std::uint64_t> equal_mns(int m, std::uint64_t capacity) {
  return std::vector<std::uint64_t>(static_cast<std::size_t>(m), capacity);
}

TEST(Placement, NReplicasFloorArithmetic) {
  // 8 MNs x 1 TB holding a 1.4 TB model: floor(8/1.4) = 5 replicas.
  const auto tables = equal_tables(14, 100'000'000'000ull);  // 1.4e12 B total
  EXPECT_EQ(compute_n_replicas(tables, equal_mns(8, 1'000'000'000'000ull)), 5);
  // 2 MNs x 1 TB, model exactly 1 TB: clamp at m.
  const auto one_tb = equal_tables(10, 100'000'000'000ull);
  EXPECT_EQ(compute_n_replicas(one_tb, equal_mns(2, 1'000'000'000'000ull)), 2);
}

TEST(Placement, NReplicasInfeasibleNamesShortfall) {
  const auto tables = equal_tables(15, 100'000'000'000ull);  // 1.5 TB
  try {
    compute_n_replicas(tables, equal_mns(1, 1'000'000'000'000ull));
    FAIL() << "expected CapacityError";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("short by 500000000000"), std::string::npos);
  }
}

TEST(Placement, GreedySingleTableForcedOnBoth) {
  const auto tables = equal_tables(1, 1 << 20);
  const auto plan = greedy_allocate(tables, equal_mns(2, 1 << 30), 2);
  ASSERT_EQ(plan.assignments.at(0).size(), 2u);
  EXPECT_EQ(plan.assignments.at(0), (std::vector<int>{0, 1}));
}

TEST(Placement, GreedyEqualTablesRoundRobin) {
  // 4 equal 100 GB tables over 4 x 1 TB MNs with 2 replicas: 2 tables per MN.
  const auto tables = equal_tables(4, 100ull << 30);
  const auto plan = greedy_allocate(tables, equal_mns(4, 1ull << 40), 2);
  const auto placed = placed_bytes_per_mn(plan, tables);
  for (const auto& [mn, bytes] : placed)
    EXPECT_EQ(bytes, 2 * (100ull << 30)) << "mn " << mn;
}

TEST(Placement, GreedyPlanInvariants) {
  const auto tables = synth_tables(64ull << 30, 200, {32, 64, 128}, std::log(80.0), 0.5, 3);
  const auto caps = equal_mns(8, 32ull << 30);
  const int n_replicas = compute_n_replicas(tables, caps);
  const auto plan = greedy_allocate(tables, caps, n_replicas);
  // Replica distinctness and count.
  for (const auto& [table_id, replicas] : plan.assignments) {
    EXPECT_EQ(static_cast<int>(replicas.size()), n_replicas);
    for (std::size_t i = 1; i < replicas.size(); ++i)
      EXPECT_LT(replicas[i - 1], replicas[i]);
  }
  // Independent recomputation: capacity never exceeded, residual consistent.
  const auto placed = placed_bytes_per_mn(plan, tables);
  for (const auto& [mn, bytes] : placed) {
    EXPECT_LE(bytes, caps[static_cast<std::size_t>(mn)]);
    EXPECT_EQ(plan.residual_capacity.at(mn), caps[static_cast<std::size_t>(mn)] - bytes);
  }
}

TEST(Placement, GreedyPlacedBytesSpreadBound) {
  const auto tables = synth_tables(80ull << 30, 1000, {32, 64, 128}, std::log(80.0), 0.5, 17);
  const auto caps = equal_mns(8, 64ull << 30);
  const auto plan = greedy_allocate(tables, caps, 2);
  const auto placed = placed_bytes_per_mn(plan, tables);
  std::uint64_t lo = placed.begin()->second, hi = placed.begin()->second;
  for (const auto& [mn, bytes] : placed) {
    lo = std::min(lo, bytes);
    hi = std::max(hi, bytes);
  }
  std::uint64_t max_table = 0;
  for (const auto& t : tables) max_table = std::max(max_table, t.size_bytes());
  EXPECT_LE(hi - lo, max_table + 1);
}

TEST(Placement, GreedyTableTooLargeForReplicas) {
  std::vector<EmbeddingTable> tables = equal_tables(1, 3ull << 30);
  EXPECT_THROW(greedy_allocate(tables, equal_mns(2, 1ull << 30), 1), PlacementError);
}

TEST(Placement, RouteSingleReplicaForced) {
  const auto tables = equal_tables(1, 1 << 20);
  const auto plan = greedy_allocate(tables, equal_mns(3, 1 << 30), 1);
  const auto routing = greedy_route(plan, tables, {0, 1});
  ASSERT_EQ(routing.entries.size(), 2u);
  EXPECT_EQ(routing.entries[0].dest_mn, routing.entries[1].dest_mn);
}

TEST(Placement, RouteTwoEqualTablesSplitAcrossReplicas) {
  const auto tables = equal_tables(2, 1 << 20);
  const auto plan = greedy_allocate(tables, equal_mns(2, 1 << 30), 2);
  const auto routing = greedy_route(plan, tables, {0});
  ASSERT_EQ(routing.entries.size(), 2u);
  EXPECT_NE(routing.entries[0].dest_mn, routing.entries[1].dest_mn);
  EXPECT_DOUBLE_EQ(routing.routed_load.at(0), routing.routed_load.at(1));
}

TEST(Placement, RouteBalanceBoundAndRecompute) {
  const auto tables = synth_tables(80ull << 30, 1000, {32, 64, 128}, std::log(80.0), 0.5, 23);
  const auto caps = equal_mns(8, 64ull << 30);
  const auto plan = greedy_allocate(tables, caps, 2);
  const std::vector<int> tasks = {0, 1, 2};
  const auto routing = greedy_route(plan, tables, tasks);
  EXPECT_EQ(routing.entries.size(), tables.size() * tasks.size());

  double max_weight = 0;
  for (const auto& t : tables) max_weight = std::max(max_weight, t.access_weight());
  double lo = routing.routed_load.begin()->second, hi = lo;
  for (const auto& [mn, load] : routing.routed_load) {
    lo = std::min(lo, load);
    hi = std::max(hi, load);
  }
  EXPECT_LE(hi - lo, max_weight + 1e-9);

  // routed_load is recomputable from the entries.
  const auto recomputed = routing.recompute_load(tables);
  for (const auto& [mn, load] : routing.routed_load)
    EXPECT_NEAR(load, recomputed.count(mn) ? recomputed.at(mn) : 0.0, 1e-6);
}

TEST(Placement, RouteUnknownTableFails) {
  const auto tables = equal_tables(2, 1 << 20);
  const auto plan = greedy_allocate({tables[0]}, equal_mns(2, 1 << 30), 1);
  EXPECT_THROW(greedy_route(plan, tables, {0}), RoutingError);
}

TEST(Placement, RandomFullReplicationMatchesGreedyAssignments) {
  const auto tables = equal_tables(4, 1 << 20);
  const auto caps = equal_mns(3, 1 << 30);
  const auto [plan, routing] = random_allocate_route(tables, caps, 3, {0}, 5);
  for (const auto& [table_id, replicas] : plan.assignments)
    EXPECT_EQ(replicas, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(routing.entries.size(), 4u);
}

TEST(Placement, RandomDeterministicPerSeed) {
  const auto tables = synth_tables(8ull << 30, 100, {32, 64}, std::log(80.0), 0.5, 2);
  const auto caps = equal_mns(8, 4ull << 30);
  const auto [plan_a, route_a] = random_allocate_route(tables, caps, 2, {0, 1}, 77);
  const auto [plan_b, route_b] = random_allocate_route(tables, caps, 2, {0, 1}, 77);
  EXPECT_EQ(plan_a.assignments, plan_b.assignments);
  ASSERT_EQ(route_a.entries.size(), route_b.entries.size());
  for (std::size_t i = 0; i < route_a.entries.size(); ++i)
    EXPECT_EQ(route_a.entries[i].dest_mn, route_b.entries[i].dest_mn);
}

TEST(Placement, GreedyBeatsRandomBalanceOnMostSeeds) {
  // Trimmed version of the acceptance check: 20 seeds here.
  const auto tables = synth_tables(40ull << 30, 1000, {32, 64, 128}, std::log(80.0), 0.5, 9);
  const auto caps = equal_mns(8, 16ull << 30);
  const auto plan = greedy_allocate(tables, caps, 2);
  const auto greedy = greedy_route(plan, tables, {0});
  std::vector<double> greedy_loads;
  for (const auto& [mn, load] : greedy.routed_load) greedy_loads.push_back(load);
  const double greedy_cov = coeff_of_variation(greedy_loads);

  int wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [rplan, rroute] = random_allocate_route(tables, caps, 2, {0}, seed);
    std::vector<double> loads;
    for (const auto& [mn, load] : rroute.routed_load) loads.push_back(load);
    if (greedy_cov < coeff_of_variation(loads)) ++wins;
  }
  EXPECT_GE(wins, 17);
}

TEST(Placement, RebalanceKeepsCoverage) {
  const auto tables = synth_tables(8ull << 30, 50, {32, 64}, std::log(80.0), 0.5, 21);
  const auto caps = equal_mns(4, 8ull << 30);
  const auto plan = greedy_allocate(tables, caps, 2);
  const auto routing = greedy_route(plan, tables, {0, 1});
  const auto result = rebalance_after_mn_failure(plan, routing, tables, /*failed_mn=*/2);
  ASSERT_TRUE(std::holds_alternative<RoutingTable>(result));
  const auto& rebalanced = std::get<RoutingTable>(result);
  // Every (task, table) pair exactly once, never on the failed MN.
  EXPECT_EQ(rebalanced.entries.size(), tables.size() * 2);
  std::set<std::pair<int, int>> seen;
  for (const auto& e : rebalanced.entries) {
    EXPECT_NE(e.dest_mn, 2);
    EXPECT_TRUE(seen.emplace(e.task_id, e.table_id).second);
  }
}

TEST(Placement, RebalanceSingleReplicaRequiresReinit) {
  const auto tables = equal_tables(4, 1 << 20);
  const auto plan = greedy_allocate(tables, equal_mns(2, 1 << 30), 1);
  const auto routing = greedy_route(plan, tables, {0});
  // With one replica, some MN hosts tables; killing it loses them.
  const int victim = plan.assignments.at(0)[0];
  const auto result = rebalance_after_mn_failure(plan, routing, tables, victim);
  ASSERT_TRUE(std::holds_alternative<ReinitRequired>(result));
  EXPECT_FALSE(std::get<ReinitRequired>(result).lost_tables.empty());
}

TEST(Placement, RebalanceOfIdleMnEqualsFreshRoute) {
  const auto tables = equal_tables(2, 1 << 20);
  // 3 MNs, 2 replicas: greedy leaves some MN unused by some tables; pick an
  // MN hosting nothing routed by making a tiny scenario.
  const auto plan = greedy_allocate(tables, equal_mns(3, 1ull << 30), 2);
  const auto routing = greedy_route(plan, tables, {0});
  // Find an MN with zero routed load but present in the plan.
  int idle = -1;
  for (const auto& [mn, load] : routing.routed_load)
    if (load == 0.0) idle = mn;
  if (idle < 0) GTEST_SKIP() << "no idle MN in this layout";
  const auto result = rebalance_after_mn_failure(plan, routing, tables, idle);
  ASSERT_TRUE(std::holds_alternative<RoutingTable>(result));
  const auto& rebalanced = std::get<RoutingTable>(result);
  std::set<int> live{0, 1, 2};
  live.erase(idle);
  const auto fresh = greedy_route(plan, tables, {0}, live);
  ASSERT_EQ(rebalanced.entries.size(), fresh.entries.size());
  for (std::size_t i = 0; i < fresh.entries.size(); ++i)
    EXPECT_EQ(rebalanced.entries[i].dest_mn, fresh.entries[i].dest_mn);
}

TEST(Placement, GreedyDeterminism) {
  const auto tables = synth_tables(16ull << 30, 300, {32, 64, 128}, std::log(80.0), 0.5, 31);
  const auto caps = equal_mns(6, 16ull << 30);
  const auto plan_a = greedy_allocate(tables, caps, 3);
  const auto plan_b = greedy_allocate(tables, caps, 3);
  EXPECT_EQ(plan_a.assignments, plan_b.assignments);
  const auto route_a = greedy_route(plan_a, tables, {0, 1});
  const auto route_b = greedy_route(plan_b, tables, {0, 1});
  ASSERT_EQ(route_a.entries.size(), route_b.entries.size());
  for (std::size_t i = 0; i < route_a.entries.size(); ++i)
    EXPECT_EQ(route_a.entries[i].dest_mn, route_b.entries[i].dest_mn);
}

}  // namespace
}  // namespace disaggsim
