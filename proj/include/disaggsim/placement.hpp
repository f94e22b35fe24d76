#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "disaggsim/common.hpp"
#include "disaggsim/model.hpp"
#include "disaggsim/rng.hpp"

namespace disaggsim {

// Table -> replica-MN assignment. MNs are dense indices [0, m). Whole tables
// are the allocation unit; every table gets exactly n_replicas distinct MNs.
struct PlacementPlan {
  int n_replicas = 1;
  std::map<int, std::vector<int>> assignments;       // table_id -> sorted MN ids
  std::map<int, std::uint64_t> residual_capacity;    // mn_id -> free bytes

  std::vector<int> mn_ids() const {
    std::vector<int> ids;
    ids.reserve(residual_capacity.size());
    for (const auto& [mn, unused] : residual_capacity) ids.push_back(mn);
    return ids;
  }
};

struct RouteEntry {
  int task_id = 0;
  int table_id = 0;
  int dest_mn = 0;
};

// MemAccess routing table: exactly one destination per (task, table) pair,
// always one of that table's replicas.
struct RoutingTable {
  std::vector<RouteEntry> entries;
  std::map<int, double> routed_load;  // mn_id -> sum of routed access weights

  std::map<int, double> recompute_load(const std::vector<EmbeddingTable>& tables) const {
    std::map<int, double> load;
    std::map<int, double> weight_of;
    for (const auto& t : tables) weight_of[t.table_id] = t.access_weight();
    for (const auto& e : entries) load[e.dest_mn] += weight_of.at(e.table_id);
    return load;
  }
};

// Number of full embedding copies the MNs can hold: floor(total capacity /
// total table bytes), clamped to [1, m]. Errors out with the shortfall when
// the model does not fit at all.
inline int compute_n_replicas(const std::vector<EmbeddingTable>& tables,
                              const std::vector<std::uint64_t>& mn_capacity_bytes) {
  std::uint64_t total_bytes = 0;
  for (const auto& t : tables) total_bytes += t.size_bytes();
  std::uint64_t total_cap = 0;
  for (auto c : mn_capacity_bytes) total_cap += c;
  if (total_bytes == 0) throw CapacityError("n_replicas: model has zero sparse bytes");
  if (total_cap < total_bytes)
    throw CapacityError("model needs " + std::to_string(total_bytes) +
                        " bytes but MNs provide " + std::to_string(total_cap) +
                        " (short by " + std::to_string(total_bytes - total_cap) + ")");
  const auto n = static_cast<int>(total_cap / total_bytes);
  return std::clamp(n, 1, static_cast<int>(mn_capacity_bytes.size()));
}

// Greedy capacity-ranked allocation: tables in descending size order (ties
// by ascending id). Replicas are assigned one pass at a time: in each pass
// every table claims the MN with the most free capacity among those not yet
// holding it (ties by ascending MN id). Placing the copies in separate
// passes keeps replica sets diverse on identical MNs; claiming the top
// n_replicas at once would lock MNs into fixed groups whose residuals move
// in lock step, and cross-group access load could then never balance.
inline PlacementPlan greedy_allocate(const std::vector<EmbeddingTable>& tables,
                                     const std::vector<std::uint64_t>& mn_capacity_bytes,
                                     int n_replicas) {
  const int m = static_cast<int>(mn_capacity_bytes.size());
  if (n_replicas < 1 || n_replicas > m)
    throw PlacementError("n_replicas " + std::to_string(n_replicas) +
                         " out of range for " + std::to_string(m) + " MNs");

  PlacementPlan plan;
  plan.n_replicas = n_replicas;
  for (int mn = 0; mn < m; ++mn)
    plan.residual_capacity[mn] = mn_capacity_bytes[static_cast<std::size_t>(mn)];

  std::vector<const EmbeddingTable*> order;
  order.reserve(tables.size());
  for (const auto& t : tables) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](const EmbeddingTable* a, const EmbeddingTable* b) {
    if (a->size_bytes() != b->size_bytes()) return a->size_bytes() > b->size_bytes();
    return a->table_id < b->table_id;
  });

  for (const auto* t : order) plan.assignments[t->table_id] = {};
  for (int replica = 0; replica < n_replicas; ++replica) {
    for (const auto* t : order) {
      auto& mine = plan.assignments[t->table_id];
      int best = -1;
      for (int mn = 0; mn < m; ++mn) {
        if (std::find(mine.begin(), mine.end(), mn) != mine.end()) continue;
        if (best < 0 || plan.residual_capacity.at(mn) > plan.residual_capacity.at(best))
          best = mn;
      }
      if (best < 0 || plan.residual_capacity.at(best) < t->size_bytes())
        throw PlacementError("table " + std::to_string(t->table_id) + " (" +
                             std::to_string(t->size_bytes()) +
                             " bytes) does not fit on " + std::to_string(n_replicas) +
                             " distinct MNs");
      plan.residual_capacity.at(best) -= t->size_bytes();
      mine.push_back(best);
    }
  }
  for (auto& [table_id, replicas] : plan.assignments)
    std::sort(replicas.begin(), replicas.end());
  return plan;
}

namespace detail {

struct RoutePair {
  int task_id;
  int table_id;
  double weight;
};

inline std::vector<RoutePair> routing_order(const std::vector<EmbeddingTable>& tables,
                                            const std::vector<int>& task_ids) {
  std::vector<RoutePair> pairs;
  pairs.reserve(tables.size() * task_ids.size());
  for (const auto& t : tables)
    for (int task : task_ids) pairs.push_back({task, t.table_id, t.access_weight()});
  std::sort(pairs.begin(), pairs.end(), [](const RoutePair& a, const RoutePair& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.table_id != b.table_id) return a.table_id < b.table_id;
    return a.task_id < b.task_id;
  });
  return pairs;
}

}  // namespace detail

// Greedy routing: (task, table) pairs in descending access-weight order each
// go to the replica MN carrying the least routed load so far. Destination
// ties break toward the MN this task has sent the least weight to (then MN
// id), so a task's accesses fan out over the MNs instead of pinning to one
// when per-table weights balance out globally. `live_mns` narrows the
// candidates after failures; empty means all plan MNs.
inline RoutingTable greedy_route(const PlacementPlan& plan,
                                 const std::vector<EmbeddingTable>& tables,
                                 const std::vector<int>& task_ids,
                                 const std::set<int>& live_mns = {}) {
  RoutingTable rt;
  for (const auto& [mn, unused] : plan.residual_capacity) {
    if (live_mns.empty() || live_mns.count(mn)) rt.routed_load[mn] = 0.0;
  }
  std::map<std::pair<int, int>, double> task_load;  // (task, mn) -> routed weight
  for (const auto& pair : detail::routing_order(tables, task_ids)) {
    auto it = plan.assignments.find(pair.table_id);
    if (it == plan.assignments.end())
      throw RoutingError("table " + std::to_string(pair.table_id) + " absent from plan");
    int best = -1;
    for (int mn : it->second) {
      if (!live_mns.empty() && !live_mns.count(mn)) continue;
      if (best < 0) {
        best = mn;
        continue;
      }
      const double global_mn = rt.routed_load.at(mn);
      const double global_best = rt.routed_load.at(best);
      if (global_mn != global_best) {
        if (global_mn < global_best) best = mn;
        continue;
      }
      if (task_load[{pair.task_id, mn}] < task_load[{pair.task_id, best}]) best = mn;
    }
    if (best < 0)
      throw RoutingError("table " + std::to_string(pair.table_id) +
                         " has no live replica to route to");
    rt.entries.push_back({pair.task_id, pair.table_id, best});
    rt.routed_load.at(best) += pair.weight;
    task_load[{pair.task_id, best}] += pair.weight;
  }
  return rt;
}

// Naive baseline: replica sets and destinations picked uniformly at random
// (capacity-checked with bounded retries). Deterministic per seed.
inline std::pair<PlacementPlan, RoutingTable> random_allocate_route(
    const std::vector<EmbeddingTable>& tables,
    const std::vector<std::uint64_t>& mn_capacity_bytes, int n_replicas,
    const std::vector<int>& task_ids, std::uint64_t seed) {
  const int m = static_cast<int>(mn_capacity_bytes.size());
  if (n_replicas < 1 || n_replicas > m)
    throw PlacementError("n_replicas " + std::to_string(n_replicas) +
                         " out of range for " + std::to_string(m) + " MNs");
  constexpr int kMaxRetries = 200;

  Rng rng(seed);
  PlacementPlan plan;
  plan.n_replicas = n_replicas;
  for (int mn = 0; mn < m; ++mn)
    plan.residual_capacity[mn] = mn_capacity_bytes[static_cast<std::size_t>(mn)];

  std::vector<const EmbeddingTable*> order;
  order.reserve(tables.size());
  for (const auto& t : tables) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](const EmbeddingTable* a, const EmbeddingTable* b) {
    return a->table_id < b->table_id;
  });

  for (const auto* t : order) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxRetries && !placed; ++attempt) {
      std::vector<int> chosen = rng.sample_distinct(m, n_replicas);
      bool fits = true;
      for (int mn : chosen)
        if (plan.residual_capacity.at(mn) < t->size_bytes()) fits = false;
      if (!fits) continue;
      for (int mn : chosen) plan.residual_capacity.at(mn) -= t->size_bytes();
      std::sort(chosen.begin(), chosen.end());
      plan.assignments[t->table_id] = std::move(chosen);
      placed = true;
    }
    if (!placed)
      throw PlacementError("random placement failed for table " +
                           std::to_string(t->table_id) + " after " +
                           std::to_string(kMaxRetries) + " attempts");
  }

  RoutingTable rt;
  for (int mn = 0; mn < m; ++mn) rt.routed_load[mn] = 0.0;
  std::map<int, double> weight_of;
  for (const auto& t : tables) weight_of[t.table_id] = t.access_weight();
  std::vector<int> tasks = task_ids;
  std::sort(tasks.begin(), tasks.end());
  for (const auto& [table_id, replicas] : plan.assignments) {
    for (int task : tasks) {
      const int dest = replicas[rng.uniform_int(0, replicas.size() - 1)];
      rt.entries.push_back({task, table_id, dest});
      rt.routed_load.at(dest) += weight_of.at(table_id);
    }
  }
  return {std::move(plan), std::move(rt)};
}

// Signals that some table lost its last replica: the unit must add backup
// MNs and re-run the full allocation.
struct ReinitRequired {
  std::vector<int> lost_tables;
};

using RebalanceResult = std::variant<RoutingTable, ReinitRequired>;

// After an MN failure: if every table still has a live replica, produce a
// fresh greedy routing over the survivors; otherwise request re-initialization.
inline RebalanceResult rebalance_after_mn_failure(const PlacementPlan& plan,
                                                  const RoutingTable& old_routing,
                                                  const std::vector<EmbeddingTable>& tables,
                                                  int failed_mn,
                                                  std::set<int> live_mns = {}) {
  if (plan.residual_capacity.find(failed_mn) == plan.residual_capacity.end())
    throw RoutingError("failed MN " + std::to_string(failed_mn) + " not in plan");
  if (live_mns.empty())
    for (const auto& [mn, unused] : plan.residual_capacity) live_mns.insert(mn);
  live_mns.erase(failed_mn);

  ReinitRequired reinit;
  for (const auto& [table_id, replicas] : plan.assignments) {
    bool covered = false;
    for (int mn : replicas)
      if (live_mns.count(mn)) covered = true;
    if (!covered) reinit.lost_tables.push_back(table_id);
  }
  if (!reinit.lost_tables.empty()) return reinit;

  std::set<int> tasks;
  for (const auto& e : old_routing.entries) tasks.insert(e.task_id);
  std::vector<int> task_ids(tasks.begin(), tasks.end());
  return greedy_route(plan, tables, task_ids, live_mns);
}

// Recomputes per-MN placed bytes from assignments; bug trap for tests and
// the simulator.
inline std::map<int, std::uint64_t> placed_bytes_per_mn(
    const PlacementPlan& plan, const std::vector<EmbeddingTable>& tables) {
  std::map<int, std::uint64_t> size_of;
  std::map<int, std::uint64_t> placed;
  for (const auto& t : tables) size_of[t.table_id] = t.size_bytes();
  for (const auto& [mn, unused] : plan.residual_capacity) placed[mn] = 0;
  for (const auto& [table_id, replicas] : plan.assignments)
    for (int mn : replicas) placed[mn] += size_of.at(table_id);
  return placed;
}

}  // namespace disaggsim
