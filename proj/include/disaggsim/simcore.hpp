#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "disaggsim/catalog.hpp"
#include "disaggsim/common.hpp"
#include "disaggsim/failures.hpp"
#include "disaggsim/model.hpp"
#include "disaggsim/perfmodel.hpp"
#include "disaggsim/placement.hpp"
#include "disaggsim/workload.hpp"

namespace disaggsim {

enum class SchedulerKind { interleaved, sequential };

inline const char* to_string(SchedulerKind s) {
  return s == SchedulerKind::interleaved ? "interleaved" : "sequential";
}

// Stage-duration oracle the engine consults for every batch. The production
// implementation derives durations from the MemAccess routing table; tests
// plug in closed-form models.
class StageCostModel {
 public:
  virtual ~StageCostModel() = default;
  virtual double preprocess_us(int batch, int task) const = 0;
  // Scatter sub-transfers in transmit order: (mn, duration). Empty means the
  // deployment has no network scatter stage (scale-up).
  virtual std::vector<std::pair<int, double>> packet_us(int batch, int task) const = 0;
  virtual double shard_us(int batch, int task, int mn) const = 0;
  virtual double gather_us(int batch, int task) const = 0;
  virtual double dense_us(int batch, int task) const = 0;
  virtual std::vector<int> shard_set(int task) const = 0;
};

// Stage costs computed from a routing table: per (task, MN) aggregated
// pooling / touched-bytes / Fsum weights.
class RoutedCostModel : public StageCostModel {
 public:
  RoutedCostModel(const ModelSpec& model, const RoutingTable& routing,
                  const std::map<int, double>& mn_bandwidth_gibps, const PerfParams& perf)
      : model_(&model), perf_(perf), mn_bw_(mn_bandwidth_gibps) {
    std::map<int, const EmbeddingTable*> by_id;
    for (const auto& t : model.tables) by_id[t.table_id] = &t;
    for (const auto& e : routing.entries) {
      const EmbeddingTable* t = by_id.at(e.table_id);
      auto& w = weights_[e.task_id][e.dest_mn];
      w.pooling += t->avg_pooling_factor;
      w.sparse_bytes += t->access_weight() * t->element_bytes;
      w.fsum_elems += t->dim;
    }
  }

  double preprocess_us(int batch, int) const override {
    return batch * model_->preprocess_cost_us_per_sample;
  }

  std::vector<std::pair<int, double>> packet_us(int batch, int task) const override {
    std::vector<std::pair<int, double>> out;
    for (const auto& [mn, w] : weights_.at(task))
      out.emplace_back(mn, perf_.network.message_us(batch * w.pooling * kIndexBytes));
    return out;
  }

  double shard_us(int batch, int task, int mn) const override {
    return transfer_us(batch * weights_.at(task).at(mn).sparse_bytes, mn_bw_.at(mn));
  }

  double gather_us(int batch, int task) const override {
    double total = 0;
    for (const auto& [mn, w] : weights_.at(task))
      total += perf_.network.message_us(batch * w.fsum_elems * kFsumElementBytes);
    return total;
  }

  double dense_us(int batch, int) const override {
    return dense_time_us(batch, model_->dense_gflops_per_sample, perf_.gpu_effective_tflops);
  }

  std::vector<int> shard_set(int task) const override {
    std::vector<int> mns;
    for (const auto& [mn, w] : weights_.at(task)) mns.push_back(mn);
    return mns;
  }

 private:
  struct Weights {
    double pooling = 0;
    double sparse_bytes = 0;
    double fsum_elems = 0;
  };
  const ModelSpec* model_;
  PerfParams perf_;
  std::map<int, double> mn_bw_;
  std::map<int, std::map<int, Weights>> weights_;  // task -> mn -> weights
};

// Scale-up server: SparseNet runs against the local memory system (one
// pseudo-shard), with the NUMA-aware variant's UPI traffic folded into the
// stage duration. No network scatter/gather.
class ScaleUpCostModel : public StageCostModel {
 public:
  ScaleUpCostModel(const ModelSpec& model, NumaMode mode, const PerfParams& perf)
      : model_(&model), mode_(mode), perf_(perf) {}

  double preprocess_us(int batch, int) const override {
    return batch * model_->preprocess_cost_us_per_sample;
  }
  std::vector<std::pair<int, double>> packet_us(int, int) const override { return {}; }
  double shard_us(int batch, int, int) const override {
    double t = numa_sparse_time_us(batch, model_->tables, mode_, perf_.numa);
    if (mode_ == NumaMode::numa_aware)
      t += numa_aware_comm_us(batch, model_->tables, perf_.numa);
    return t;
  }
  double gather_us(int, int) const override { return 0; }
  double dense_us(int batch, int) const override {
    return dense_time_us(batch, model_->dense_gflops_per_sample, perf_.gpu_effective_tflops);
  }
  std::vector<int> shard_set(int) const override { return {0}; }

 private:
  const ModelSpec* model_;
  NumaMode mode_;
  PerfParams perf_;
};

// End-of-run snapshot.
struct SimResult {
  std::vector<double> per_query_latency_us;  // arrival order
  double p95_latency_us = 0;
  double achieved_qps = 0;
  std::map<std::string, double> busy_fractions;
  double energy_joules = 0;
  std::uint64_t completed_queries = 0;
  std::uint64_t total_queries = 0;
  std::uint64_t total_batches = 0;
  double horizon_us = 0;
  double sla_us = 0;
  std::uint64_t sla_violations = 0;
};

// Per-node TDP data for the energy model.
struct NodePower {
  double cn_cpu_tdp = 86.0;
  double cn_nic_tdp = 20.0;
  double gpu_tdp = 400.0;
  double mn_tdp = 427.9;
};

// Everything needed to instantiate one serving unit in the engine.
struct UnitSetup {
  Deployment deployment = Deployment::disaggregated;
  int n_cns = 1;
  int m_mns = 1;
  int gpus_per_cn = 1;
  int n_backup_cns = 0;
  int n_backup_mns = 0;
  SchedulerKind scheduler = SchedulerKind::sequential;
  int max_batch = 128;
  double max_wait_us = 2000.0;
  std::shared_ptr<const StageCostModel> cost_model;
  // Wiring for routing updates after MN failures; unset for synthetic units.
  std::shared_ptr<const ModelSpec> model;
  PlacementPlan plan;
  RoutingTable routing;
  std::vector<std::uint64_t> mn_capacity_bytes;  // base + backup MNs
  double mn_bandwidth_gibps = 145.0;
  PerfParams perf;
  FailureTrace failure_trace;
  FailureProfile cn_profile;
  FailureProfile mn_profile;
  NodePower power;
};

// Builds the production cost model for `setup` from the given routing.
inline std::shared_ptr<const StageCostModel> make_routed_cost_model(
    const UnitSetup& setup, const RoutingTable& routing) {
  std::map<int, double> bw;
  for (int mn = 0; mn < setup.m_mns + setup.n_backup_mns; ++mn)
    bw[mn] = setup.mn_bandwidth_gibps;
  return std::make_shared<RoutedCostModel>(*setup.model, routing, bw, setup.perf);
}

// Deterministic discrete-event engine for one serving unit: round-robin
// query dispatch to CN tasks, per-CN batching, the preprocess -> scatter ->
// sparse -> gather -> dense pipeline over FIFO resources, interleaved or
// sequential shard scheduling, and CN/MN failure handling. Single-threaded;
// identical inputs give identical event orders.
class Simulation {
 public:
  explicit Simulation(UnitSetup setup) : setup_(std::move(setup)) {
    if (!setup_.cost_model && setup_.model)
      setup_.cost_model = make_routed_cost_model(setup_, setup_.routing);
    if (!setup_.cost_model) throw ConfigError("simulation: no cost model");
    cost_ = setup_.cost_model;
    init_nodes();
  }

  SimResult run(const std::vector<Query>& trace, double sla_us = 100000.0) {
    for (std::size_t i = 0; i < trace.size(); ++i) {
      queries_.push_back({trace[i].arrival_time_us, trace[i].num_samples, -1.0});
      push(trace[i].arrival_time_us, EvKind::arrival, i);
    }
    for (const auto& fe : setup_.failure_trace.events) {
      auto it = node_index_.find(fe.node_id);
      if (it == node_index_.end())
        throw ConfigError("failure trace names unknown node " + fe.node_id);
      push(fe.time_us, fe.kind == FailureKind::fail ? EvKind::node_fail : EvKind::node_recover,
           0, it->second);
    }
    while (!events_.empty()) {
      const Ev ev = events_.top();
      events_.pop();
      now_ = ev.t;
      dispatch(ev);
    }
    return finalize(sla_us);
  }

  // Routing tables installed over the run, the initial one at t=0 included.
  const std::vector<std::pair<double, RoutingTable>>& routing_history() const {
    return routing_history_;
  }

  // Optional per-event log for debugging; rows in processing order.
  struct EventLogRow {
    double time_us;
    const char* kind;
    std::uint64_t id;
    int node;
  };
  void enable_event_log() { log_events_ = true; }
  const std::vector<EventLogRow>& event_log() const { return event_log_; }

 private:
  enum class EvKind {
    arrival,
    batch_deadline,
    preprocess_done,
    packet_delivered,
    shard_done,
    gather_done,
    dense_done,
    node_fail,
    node_recover,
    routing_install,
    migrate_done,
    ps_shard_tick
  };

  struct Ev {
    double t = 0;
    std::uint64_t seq = 0;
    EvKind kind = EvKind::arrival;
    std::uint64_t id = 0;  // query index, batch id, or install version
    int node = -1;         // encoded node / resource index
    int attempt = 0;
    std::uint64_t round = 0;  // sequential-controller dispatch round
    bool operator>(const Ev& o) const {
      if (t != o.t) return t > o.t;
      return seq > o.seq;
    }
  };

  // FIFO service station. Completion events free the station only when they
  // match the current service, so stale events from failed attempts are
  // harmless no-ops.
  struct Fifo {
    bool busy = false;
    double busy_us = 0;
    std::uint64_t cur_batch = 0;
    int cur_attempt = -1;
    std::deque<std::uint64_t> q;

    void begin(std::uint64_t bid, int attempt, double dur) {
      busy = true;
      busy_us += dur;
      cur_batch = bid;
      cur_attempt = attempt;
    }
    bool matches(std::uint64_t bid, int attempt) const {
      return busy && cur_batch == bid && cur_attempt == attempt;
    }
  };

  struct Cn {
    std::string node_id;
    bool alive = true;
    bool task_active = false;  // hosts a live primary task
    double task_ready_us = 0;
    std::unique_ptr<Batcher> batcher;
    std::optional<double> armed_deadline;
    Fifo cpu, tx, rx;
    std::vector<Fifo> gpus;
    std::size_t next_gpu = 0;
  };

  struct Mn {
    std::string node_id;
    bool alive = true;
    bool active = false;  // part of the current placement
    Fifo shard;
    // Interleaved mode: the shard engine serves all admitted packets
    // concurrently (processor sharing); work_us is the remaining full-rate
    // service per batch.
    std::map<std::uint64_t, double> ps_work_us;
    double ps_last_update_us = 0;
    std::uint64_t ps_version = 0;

    void ps_advance(double now) {
      if (!ps_work_us.empty()) {
        const double elapsed = now - ps_last_update_us;
        const double share = elapsed / static_cast<double>(ps_work_us.size());
        for (auto& [bid, work] : ps_work_us) work -= share;
        shard.busy_us += elapsed;
      }
      ps_last_update_us = now;
    }
  };

  enum class BatchState { in_cpu, in_tx, in_sparse, in_gather, in_dense, stranded, done };

  struct BatchRec {
    Batch batch;
    int task = 0;
    int cn = 0;
    int attempt = 0;
    BatchState state = BatchState::in_cpu;
    std::vector<std::pair<int, double>> packets;
    std::size_t delivered = 0;
    std::set<int> pending_shards;
    double scatter_done_us = 0;
    bool hit_dead_mn = false;
  };

  struct QueryRec {
    double arrival_us = 0;
    int remaining = 0;
    double completed_us = -1.0;
  };

  // --- setup ----------------------------------------------------------------

  int encode_mn(int mn_idx) const { return static_cast<int>(cns_.size()) + mn_idx; }

  void init_nodes() {
    const bool bundled = setup_.deployment != Deployment::disaggregated;
    if (bundled && setup_.n_backup_cns != setup_.n_backup_mns)
      throw ConfigError("bundled deployments need matching CN/MN backup counts");
    const int total_cns = setup_.n_cns + setup_.n_backup_cns;
    const int total_mns = setup_.m_mns + setup_.n_backup_mns;
    for (int i = 0; i < total_cns; ++i) {
      Cn cn;
      cn.node_id = bundled ? "srv" + std::to_string(i) : "cn" + std::to_string(i);
      cn.task_active = i < setup_.n_cns;
      cn.batcher = std::make_unique<Batcher>(setup_.max_batch, setup_.max_wait_us,
                                             static_cast<std::uint64_t>(i) << 40);
      cn.gpus.resize(static_cast<std::size_t>(setup_.gpus_per_cn));
      cns_.push_back(std::move(cn));
      if (i < setup_.n_cns) {
        task_owner_[i] = i;
        dispatch_ring_.push_back(i);
      } else {
        backup_cns_.push_back(i);
      }
    }
    for (int j = 0; j < total_mns; ++j) {
      Mn mn;
      mn.node_id = bundled ? "srv" + std::to_string(j) : "mn" + std::to_string(j);
      mn.active = j < setup_.m_mns;
      mns_.push_back(std::move(mn));
    }
    for (int i = 0; i < total_cns; ++i) node_index_[cns_[static_cast<std::size_t>(i)].node_id] = i;
    if (!bundled)
      for (int j = 0; j < total_mns; ++j)
        node_index_[mns_[static_cast<std::size_t>(j)].node_id] = encode_mn(j);
    routing_history_.emplace_back(0.0, setup_.routing);
    node_alive_since_.assign(cns_.size() + mns_.size(), 0.0);
    node_alive_us_.assign(cns_.size() + mns_.size(), 0.0);
  }

  // --- event plumbing ---------------------------------------------------------

  void push(double t, EvKind kind, std::uint64_t id, int node = -1, int attempt = 0,
            std::uint64_t round = 0) {
    events_.push(Ev{t, next_seq_++, kind, id, node, attempt, round});
  }

  static const char* kind_name(EvKind k) {
    switch (k) {
      case EvKind::arrival: return "arrival";
      case EvKind::batch_deadline: return "batch_deadline";
      case EvKind::preprocess_done: return "preprocess_done";
      case EvKind::packet_delivered: return "packet_delivered";
      case EvKind::shard_done: return "shard_done";
      case EvKind::gather_done: return "gather_done";
      case EvKind::dense_done: return "dense_done";
      case EvKind::node_fail: return "node_fail";
      case EvKind::node_recover: return "node_recover";
      case EvKind::routing_install: return "routing_install";
      case EvKind::migrate_done: return "migrate_done";
      default: return "ps_shard_tick";
    }
  }

  void dispatch(const Ev& ev) {
    if (log_events_) event_log_.push_back({ev.t, kind_name(ev.kind), ev.id, ev.node});
    switch (ev.kind) {
      case EvKind::arrival: on_arrival(ev); break;
      case EvKind::batch_deadline: on_batch_deadline(ev); break;
      case EvKind::preprocess_done: on_preprocess_done(ev); break;
      case EvKind::packet_delivered: on_packet_delivered(ev); break;
      case EvKind::shard_done: on_shard_done(ev); break;
      case EvKind::gather_done: on_gather_done(ev); break;
      case EvKind::dense_done: on_dense_done(ev); break;
      case EvKind::node_fail: on_node_fail(ev); break;
      case EvKind::node_recover: on_node_recover(ev); break;
      case EvKind::routing_install: on_routing_install(ev); break;
      case EvKind::migrate_done: try_start_cpu(ev.node); break;
      case EvKind::ps_shard_tick: on_ps_shard_tick(ev); break;
    }
  }

  // --- batching ----------------------------------------------------------------

  void on_arrival(const Ev& ev) {
    const auto qidx = ev.id;
    const int cn_idx = dispatch_ring_[ring_cursor_++ % dispatch_ring_.size()];
    Cn& cn = cns_[static_cast<std::size_t>(cn_idx)];
    Query q{qidx, now_, queries_[qidx].remaining};
    auto emitted = cn.batcher->on_query(q, now_);
    for (auto& b : emitted) admit_batch(std::move(b), cn_idx);
    rearm_deadline(cn_idx);
  }

  void rearm_deadline(int cn_idx) {
    Cn& cn = cns_[static_cast<std::size_t>(cn_idx)];
    const auto dl = cn.batcher->deadline_us();
    if (dl && (!cn.armed_deadline || *cn.armed_deadline != *dl)) {
      cn.armed_deadline = *dl;
      push(*dl, EvKind::batch_deadline, 0, cn_idx);
    }
    if (!dl) cn.armed_deadline.reset();
  }

  void on_batch_deadline(const Ev& ev) {
    Cn& cn = cns_[static_cast<std::size_t>(ev.node)];
    if (!cn.armed_deadline || *cn.armed_deadline != ev.t) return;  // stale timer
    cn.armed_deadline.reset();
    if (auto b = cn.batcher->flush(now_)) admit_batch(std::move(*b), ev.node);
    rearm_deadline(ev.node);
  }

  void admit_batch(Batch b, int cn_idx) {
    const auto bid = b.batch_id;
    BatchRec rec;
    rec.batch = std::move(b);
    rec.cn = cn_idx;
    rec.task = task_of_cn(cn_idx);
    rec.state = BatchState::in_cpu;
    batches_[bid] = std::move(rec);
    ++total_batches_;
    if (log_events_) event_log_.push_back({now_, "batch_formed", bid, cn_idx});
    cns_[static_cast<std::size_t>(cn_idx)].cpu.q.push_back(bid);
    try_start_cpu(cn_idx);
  }

  int task_of_cn(int cn_idx) const {
    for (const auto& [task, cn] : task_owner_)
      if (cn == cn_idx) return task;
    throw SimInvariantError("no task on CN " + std::to_string(cn_idx));
  }

  // --- pipeline ------------------------------------------------------------------

  BatchRec* live_rec(std::uint64_t bid, int attempt) {
    auto it = batches_.find(bid);
    if (it == batches_.end() || it->second.attempt != attempt) return nullptr;
    return &it->second;
  }

  void try_start_cpu(int cn_idx) {
    Cn& cn = cns_[static_cast<std::size_t>(cn_idx)];
    if (!cn.alive || !cn.task_active || now_ < cn.task_ready_us || cn.cpu.busy) return;
    while (!cn.cpu.q.empty()) {
      const auto bid = cn.cpu.q.front();
      cn.cpu.q.pop_front();
      auto it = batches_.find(bid);
      if (it == batches_.end() || it->second.state != BatchState::in_cpu ||
          it->second.cn != cn_idx)
        continue;  // stale entry from a retry
      auto& rec = it->second;
      const double dur = cost_->preprocess_us(rec.batch.num_samples, rec.task);
      cn.cpu.begin(bid, rec.attempt, dur);
      push(now_ + dur, EvKind::preprocess_done, bid, cn_idx, rec.attempt);
      return;
    }
  }

  void on_preprocess_done(const Ev& ev) {
    Cn& cn = cns_[static_cast<std::size_t>(ev.node)];
    if (cn.cpu.matches(ev.id, ev.attempt)) {
      cn.cpu.busy = false;
      try_start_cpu(ev.node);
    }
    BatchRec* rec = live_rec(ev.id, ev.attempt);
    if (!rec) return;
    rec->state = BatchState::in_tx;
    cn.tx.q.push_back(ev.id);
    try_start_tx(ev.node);
  }

  void try_start_tx(int cn_idx) {
    Cn& cn = cns_[static_cast<std::size_t>(cn_idx)];
    if (!cn.alive || cn.tx.busy) return;
    while (!cn.tx.q.empty()) {
      const auto bid = cn.tx.q.front();
      cn.tx.q.pop_front();
      auto it = batches_.find(bid);
      if (it == batches_.end() || it->second.state != BatchState::in_tx ||
          it->second.cn != cn_idx)
        continue;
      auto& rec = it->second;
      rec.packets = cost_->packet_us(rec.batch.num_samples, rec.task);
      rec.delivered = 0;
      rec.hit_dead_mn = false;
      rec.pending_shards.clear();
      rec.state = BatchState::in_sparse;
      if (rec.packets.empty()) {
        // no network stage (scale-up): straight to the memory system's queue
        rec.scatter_done_us = now_;
        for (int mn : cost_->shard_set(rec.task)) {
          rec.pending_shards.insert(mn);
          mns_[static_cast<std::size_t>(mn)].shard.q.push_back(bid);
          try_start_shard(mn);
        }
        continue;
      }
      check_packets_against_dead_mns(rec);
      double offset = 0;
      for (std::size_t i = 0; i < rec.packets.size(); ++i) {
        rec.pending_shards.insert(rec.packets[i].first);
        offset += rec.packets[i].second;
        push(now_ + offset, EvKind::packet_delivered, bid, static_cast<int>(i), rec.attempt);
      }
      cn.tx.begin(bid, rec.attempt, offset);
      return;
    }
  }

  // Bug trap: outside a failure-recovery window, routing must never point a
  // packet at a dead MN.
  void check_packets_against_dead_mns(const BatchRec& rec) const {
    if (pending_installs_ > 0) return;
    for (const auto& [mn, dur] : rec.packets)
      if (!mns_[static_cast<std::size_t>(mn)].alive)
        throw SimInvariantError("routing references dead MN " + std::to_string(mn) +
                                " outside a failure window");
  }

  void on_packet_delivered(const Ev& ev) {
    BatchRec* rec = live_rec(ev.id, ev.attempt);
    if (!rec) return;
    const auto pkt = static_cast<std::size_t>(ev.node);
    const int mn_idx = rec->packets[pkt].first;
    ++rec->delivered;
    Mn& mn = mns_[static_cast<std::size_t>(mn_idx)];
    if (!mn.alive) {
      rec->hit_dead_mn = true;
    } else if (setup_.scheduler == SchedulerKind::interleaved &&
               rec->state == BatchState::in_sparse) {
      ps_admit(mn_idx, ev.id, *rec);
    }
    if (rec->delivered == rec->packets.size()) {
      rec->scatter_done_us = now_;
      Cn& cn = cns_[static_cast<std::size_t>(rec->cn)];
      if (cn.tx.matches(ev.id, ev.attempt)) {
        cn.tx.busy = false;
        try_start_tx(rec->cn);
      }
      if (rec->hit_dead_mn) {
        strand_batch(ev.id);
      } else if (setup_.scheduler == SchedulerKind::sequential) {
        seq_queue_.emplace(rec->scatter_done_us, ev.id);
        try_seq_dispatch();
      }
    }
  }

  void try_start_shard(int mn_idx) {
    Mn& mn = mns_[static_cast<std::size_t>(mn_idx)];
    if (!mn.alive || mn.shard.busy) return;
    while (!mn.shard.q.empty()) {
      const auto bid = mn.shard.q.front();
      mn.shard.q.pop_front();
      auto it = batches_.find(bid);
      if (it == batches_.end() || it->second.state != BatchState::in_sparse ||
          !it->second.pending_shards.count(mn_idx))
        continue;
      auto& rec = it->second;
      const double dur = cost_->shard_us(rec.batch.num_samples, rec.task, mn_idx);
      mn.shard.begin(bid, rec.attempt, dur);
      push(now_ + dur, EvKind::shard_done, bid, mn_idx, rec.attempt, seq_round_);
      return;
    }
  }

  // Interleaved service: the shard engine works on every admitted packet at
  // once (equal shares), matching an MN that responds to multiple queries'
  // packets concurrently. Admission order is FCFS by packet delivery.
  void ps_admit(int mn_idx, std::uint64_t bid, const BatchRec& rec) {
    Mn& mn = mns_[static_cast<std::size_t>(mn_idx)];
    mn.ps_advance(now_);
    mn.ps_work_us[bid] = cost_->shard_us(rec.batch.num_samples, rec.task, mn_idx);
    ++mn.ps_version;
    ps_schedule(mn_idx);
  }

  void ps_schedule(int mn_idx) {
    Mn& mn = mns_[static_cast<std::size_t>(mn_idx)];
    if (mn.ps_work_us.empty()) return;
    double min_work = -1;
    for (const auto& [bid, work] : mn.ps_work_us)
      if (min_work < 0 || work < min_work) min_work = work;
    const double finish =
        now_ + std::max(0.0, min_work) * static_cast<double>(mn.ps_work_us.size());
    push(finish, EvKind::ps_shard_tick, mn.ps_version, mn_idx);
  }

  void on_ps_shard_tick(const Ev& ev) {
    Mn& mn = mns_[static_cast<std::size_t>(ev.node)];
    if (ev.id != mn.ps_version || !mn.alive) return;  // superseded admission/failure
    mn.ps_advance(now_);
    std::vector<std::uint64_t> finished;
    for (const auto& [bid, work] : mn.ps_work_us)
      if (work <= 1e-6) finished.push_back(bid);
    for (auto bid : finished) mn.ps_work_us.erase(bid);
    ++mn.ps_version;
    ps_schedule(ev.node);
    for (auto bid : finished) complete_shard(bid, ev.node);
  }

  // Batch-side bookkeeping shared by all shard service disciplines.
  void complete_shard(std::uint64_t bid, int mn_idx) {
    auto it = batches_.find(bid);
    if (it == batches_.end()) return;
    auto& rec = it->second;
    rec.pending_shards.erase(mn_idx);
    if (rec.pending_shards.empty() && rec.state == BatchState::in_sparse) {
      if (rec.packets.empty()) {
        enqueue_dense(bid);  // scale-up: no gather transfer
      } else {
        rec.state = BatchState::in_gather;
        cns_[static_cast<std::size_t>(rec.cn)].rx.q.push_back(bid);
        try_start_rx(rec.cn);
      }
    }
  }

  // Sequential controller: batches run their sparse stage one at a time
  // across all MNs, ordered by scatter completion (ties by batch id). The
  // lock-step barrier releases when every shard of the dispatched batch has
  // drained.
  void try_seq_dispatch() {
    while (!seq_busy_ && !seq_queue_.empty()) {
      const auto [ready_us, bid] = *seq_queue_.begin();
      seq_queue_.erase(seq_queue_.begin());
      auto it = batches_.find(bid);
      if (it == batches_.end() || it->second.state != BatchState::in_sparse) continue;
      auto& rec = it->second;
      bool all_alive = true;
      for (int mn : rec.pending_shards)
        if (!mns_[static_cast<std::size_t>(mn)].alive) all_alive = false;
      if (!all_alive) {
        strand_batch(bid);
        continue;
      }
      ++seq_round_;
      seq_busy_ = true;
      seq_outstanding_ = rec.pending_shards.size();
      for (int mn_idx : rec.pending_shards) {
        Mn& mn = mns_[static_cast<std::size_t>(mn_idx)];
        const double dur = cost_->shard_us(rec.batch.num_samples, rec.task, mn_idx);
        mn.shard.begin(bid, rec.attempt, dur);
        push(now_ + dur, EvKind::shard_done, bid, mn_idx, rec.attempt, seq_round_);
      }
    }
  }

  void on_shard_done(const Ev& ev) {
    Mn& mn = mns_[static_cast<std::size_t>(ev.node)];
    if (mn.shard.matches(ev.id, ev.attempt)) mn.shard.busy = false;
    if (setup_.scheduler == SchedulerKind::sequential && ev.round == seq_round_ &&
        seq_outstanding_ > 0 && --seq_outstanding_ == 0) {
      seq_busy_ = false;
      try_seq_dispatch();
    }
    try_start_shard(ev.node);
    if (!live_rec(ev.id, ev.attempt)) return;
    complete_shard(ev.id, ev.node);
  }

  void try_start_rx(int cn_idx) {
    Cn& cn = cns_[static_cast<std::size_t>(cn_idx)];
    if (!cn.alive || cn.rx.busy) return;
    while (!cn.rx.q.empty()) {
      const auto bid = cn.rx.q.front();
      cn.rx.q.pop_front();
      auto it = batches_.find(bid);
      if (it == batches_.end() || it->second.state != BatchState::in_gather ||
          it->second.cn != cn_idx)
        continue;
      auto& rec = it->second;
      const double dur = cost_->gather_us(rec.batch.num_samples, rec.task);
      cn.rx.begin(bid, rec.attempt, dur);
      push(now_ + dur, EvKind::gather_done, bid, cn_idx, rec.attempt);
      return;
    }
  }

  void on_gather_done(const Ev& ev) {
    Cn& cn = cns_[static_cast<std::size_t>(ev.node)];
    if (cn.rx.matches(ev.id, ev.attempt)) {
      cn.rx.busy = false;
      try_start_rx(ev.node);
    }
    BatchRec* rec = live_rec(ev.id, ev.attempt);
    if (!rec) return;
    enqueue_dense(ev.id);
  }

  void enqueue_dense(std::uint64_t bid) {
    auto& rec = batches_.at(bid);
    rec.state = BatchState::in_dense;
    Cn& cn = cns_[static_cast<std::size_t>(rec.cn)];
    const auto gpu = cn.next_gpu++ % cn.gpus.size();  // round-robin across replicas
    cn.gpus[gpu].q.push_back(bid);
    try_start_gpu(rec.cn, static_cast<int>(gpu));
  }

  void try_start_gpu(int cn_idx, int gpu_idx) {
    Cn& cn = cns_[static_cast<std::size_t>(cn_idx)];
    Fifo& gpu = cn.gpus[static_cast<std::size_t>(gpu_idx)];
    if (!cn.alive || gpu.busy) return;
    while (!gpu.q.empty()) {
      const auto bid = gpu.q.front();
      gpu.q.pop_front();
      auto it = batches_.find(bid);
      if (it == batches_.end() || it->second.state != BatchState::in_dense ||
          it->second.cn != cn_idx)
        continue;
      auto& rec = it->second;
      const double dur = cost_->dense_us(rec.batch.num_samples, rec.task);
      gpu.begin(bid, rec.attempt, dur);
      push(now_ + dur, EvKind::dense_done, bid, cn_idx * 1000 + gpu_idx, rec.attempt);
      return;
    }
  }

  void on_dense_done(const Ev& ev) {
    const int cn_idx = ev.node / 1000;
    const int gpu_idx = ev.node % 1000;
    Cn& cn = cns_[static_cast<std::size_t>(cn_idx)];
    Fifo& gpu = cn.gpus[static_cast<std::size_t>(gpu_idx)];
    if (gpu.matches(ev.id, ev.attempt)) {
      gpu.busy = false;
      try_start_gpu(cn_idx, gpu_idx);
    }
    BatchRec* rec = live_rec(ev.id, ev.attempt);
    if (!rec) return;
    rec->state = BatchState::done;
    for (const auto& part : rec->batch.parts) {
      auto& qr = queries_[part.query_id];
      qr.remaining -= part.num_samples;
      if (qr.remaining == 0) {
        qr.completed_us = now_;
        ++completed_;
      }
    }
  }

  // --- failures --------------------------------------------------------------------

  void strand_batch(std::uint64_t bid) {
    auto& rec = batches_.at(bid);
    ++rec.attempt;  // invalidates queued/running stage events
    rec.state = BatchState::stranded;
    rec.pending_shards.clear();
    Cn& cn = cns_[static_cast<std::size_t>(rec.cn)];
    if (pending_installs_ == 0 && cn.alive) {
      // routing was already repaired; re-scatter right away
      rec.state = BatchState::in_tx;
      cn.tx.q.push_back(bid);
      try_start_tx(rec.cn);
    } else {
      stranded_.push_back(bid);
    }
  }

  void on_node_fail(const Ev& ev) {
    const bool bundled = setup_.deployment != Deployment::disaggregated;
    if (ev.node < static_cast<int>(cns_.size())) {
      fail_cn(ev.node);
      if (bundled) fail_mn(ev.node);
    } else {
      fail_mn(ev.node - static_cast<int>(cns_.size()));
    }
  }

  void on_node_recover(const Ev& ev) {
    const bool bundled = setup_.deployment != Deployment::disaggregated;
    if (ev.node < static_cast<int>(cns_.size())) {
      recover_cn(ev.node);
      if (bundled) recover_mn(ev.node);
    } else {
      recover_mn(ev.node - static_cast<int>(cns_.size()));
    }
  }

  void fail_cn(int cn_idx) {
    Cn& cn = cns_[static_cast<std::size_t>(cn_idx)];
    if (!cn.alive) return;
    mark_alive(true, cn_idx, false);
    cn.alive = false;
    cn.cpu.busy = false;
    cn.tx.busy = false;
    cn.rx.busy = false;
    for (auto& gpu : cn.gpus) gpu.busy = false;
    if (!cn.task_active) {
      remove_from_pool(backup_cns_, cn_idx);
      return;  // standby died: nothing to migrate
    }
    cn.task_active = false;

    if (backup_cns_.empty())
      throw InfeasibleError("CN " + cn.node_id + " failed with no backup CN available");
    const int backup = backup_cns_.front();
    backup_cns_.erase(backup_cns_.begin());
    const int task = task_of_cn(cn_idx);
    task_owner_[task] = backup;
    for (auto& slot : dispatch_ring_)
      if (slot == cn_idx) slot = backup;

    Cn& bk = cns_[static_cast<std::size_t>(backup)];
    const double ready = now_ + setup_.cn_profile.migrate_delay_s * kUsPerSec;
    bk.task_active = true;
    bk.task_ready_us = ready;
    // the open partial batch follows the task
    cn.batcher->move_open_to(*bk.batcher, now_);
    cn.armed_deadline.reset();
    rearm_deadline(backup);

    // every in-flight batch of this task restarts from preprocessing on the
    // backup once the migration completes
    std::vector<std::uint64_t> affected;
    for (auto& [bid, rec] : batches_)
      if (rec.cn == cn_idx && rec.state != BatchState::done) affected.push_back(bid);
    for (auto bid : affected) {
      auto& rec = batches_.at(bid);
      if (rec.state == BatchState::in_sparse && setup_.scheduler == SchedulerKind::sequential)
        seq_purge(bid);
      if (rec.state == BatchState::stranded) remove_from_stranded(bid);
      ++rec.attempt;
      rec.pending_shards.clear();
      rec.state = BatchState::in_cpu;
      rec.cn = backup;
      bk.cpu.q.push_back(bid);
    }
    push(ready, EvKind::migrate_done, 0, backup);
  }

  void seq_purge(std::uint64_t bid) {
    for (auto it = seq_queue_.begin(); it != seq_queue_.end();) {
      if (it->second == bid)
        it = seq_queue_.erase(it);
      else
        ++it;
    }
  }

  void remove_from_stranded(std::uint64_t bid) {
    for (auto it = stranded_.begin(); it != stranded_.end();) {
      if (*it == bid)
        it = stranded_.erase(it);
      else
        ++it;
    }
  }

  static void remove_from_pool(std::vector<int>& pool, int idx) {
    for (auto it = pool.begin(); it != pool.end();) {
      if (*it == idx)
        it = pool.erase(it);
      else
        ++it;
    }
  }

  void fail_mn(int mn_idx) {
    Mn& mn = mns_[static_cast<std::size_t>(mn_idx)];
    if (!mn.alive) return;
    mark_alive(false, mn_idx, false);
    mn.alive = false;
    mn.shard.busy = false;
    mn.shard.q.clear();
    mn.ps_advance(now_);
    mn.ps_work_us.clear();
    ++mn.ps_version;
    if (!mn.active) {
      remove_from_pool(backup_mns_, mn_idx);
      return;  // standby pool member died
    }
    mn.active = false;

    // plan the recovery first so stranded batches always have an install to
    // wait for, then strand the affected batches
    if (setup_.deployment != Deployment::disaggregated) {
      // bundled recovery: a standby server reloads this member's shard and
      // takes over both roles; the logical slot returns after the reload
      const double at = now_ + setup_.mn_profile.reinit_delay_s * kUsPerSec;
      pending_server_restore_.push_back({at, mn_idx});
      ++pending_installs_;
      push(at, EvKind::routing_install, ++install_version_, -1);
    } else {
      if (!setup_.model)
        throw SimInvariantError("MN failure injected into a unit without routing wiring");
      std::set<int> live;
      for (int j = 0; j < static_cast<int>(mns_.size()); ++j)
        if (mns_[static_cast<std::size_t>(j)].alive && mns_[static_cast<std::size_t>(j)].active)
          live.insert(j);
      live.insert(mn_idx);  // the rebalance call removes the failed MN itself
      auto result = rebalance_after_mn_failure(setup_.plan, routing_history_.back().second,
                                               setup_.model->tables, mn_idx, live);
      ++install_version_;
      ++pending_installs_;
      if (std::holds_alternative<RoutingTable>(result)) {
        pending_routing_ = std::get<RoutingTable>(result);
        pending_plan_.reset();
        push(now_ + setup_.mn_profile.routing_update_delay_s * kUsPerSec,
             EvKind::routing_install, install_version_, -1);
      } else {
        plan_reinit(std::get<ReinitRequired>(result));
      }
    }

    // strand every batch whose current attempt still involves this MN
    std::vector<std::uint64_t> affected;
    for (auto& [bid, rec] : batches_) {
      if (rec.state == BatchState::in_sparse &&
          (rec.pending_shards.count(mn_idx) ||
           (rec.delivered < rec.packets.size() && packet_targets(rec, mn_idx))))
        affected.push_back(bid);
    }
    for (auto bid : affected) {
      auto& rec = batches_.at(bid);
      if (rec.delivered < rec.packets.size() && !rec.packets.empty()) {
        // mid-scatter: the TX link finishes its transfer; the final packet
        // delivery strands the batch
        rec.hit_dead_mn = true;
      } else {
        if (setup_.scheduler == SchedulerKind::sequential) seq_purge(bid);
        strand_batch(bid);
      }
    }
  }

  bool packet_targets(const BatchRec& rec, int mn_idx) const {
    for (const auto& [mn, dur] : rec.packets)
      if (mn == mn_idx) return true;
    return false;
  }

  // Replica loss: activate backup MNs until the model fits again, then
  // rebuild the allocation and routing from scratch.
  void plan_reinit(const ReinitRequired& why) {
    std::vector<int> live;
    for (int j = 0; j < static_cast<int>(mns_.size()); ++j)
      if (mns_[static_cast<std::size_t>(j)].alive && mns_[static_cast<std::size_t>(j)].active)
        live.push_back(j);
    std::vector<int> activated;
    auto fits = [&]() {
      std::uint64_t cap = 0;
      for (int j : live) cap += setup_.mn_capacity_bytes[static_cast<std::size_t>(j)];
      return cap >= setup_.model->total_sparse_bytes();
    };
    while (!fits() && !backup_mns_.empty()) {
      const int add = backup_mns_.front();
      backup_mns_.erase(backup_mns_.begin());
      live.push_back(add);
      activated.push_back(add);
      std::sort(live.begin(), live.end());
    }
    if (!fits())
      throw InfeasibleError("replica loss (" + std::to_string(why.lost_tables.size()) +
                            " tables) and no backup MN capacity to re-initialize");
    std::vector<std::uint64_t> caps;
    caps.reserve(live.size());
    for (int j : live) caps.push_back(setup_.mn_capacity_bytes[static_cast<std::size_t>(j)]);
    const int n_rep = compute_n_replicas(setup_.model->tables, caps);
    PlacementPlan plan = greedy_allocate(setup_.model->tables, caps, n_rep);
    // remap dense positions back to actual MN indices
    PlacementPlan remapped;
    remapped.n_replicas = plan.n_replicas;
    for (const auto& [pos, res] : plan.residual_capacity)
      remapped.residual_capacity[live[static_cast<std::size_t>(pos)]] = res;
    for (const auto& [table_id, reps] : plan.assignments) {
      std::vector<int> actual;
      for (int pos : reps) actual.push_back(live[static_cast<std::size_t>(pos)]);
      std::sort(actual.begin(), actual.end());
      remapped.assignments[table_id] = std::move(actual);
    }
    std::vector<int> task_ids;
    for (const auto& [task, cn] : task_owner_) task_ids.push_back(task);
    pending_routing_ = greedy_route(remapped, setup_.model->tables, task_ids);
    pending_plan_ = std::move(remapped);
    pending_activation_ = std::move(activated);
    push(now_ + setup_.mn_profile.reinit_delay_s * kUsPerSec, EvKind::routing_install,
         install_version_, -1);
  }

  void on_routing_install(const Ev& ev) {
    --pending_installs_;
    if (ev.id != install_version_) return;  // superseded by a later failure
    for (auto it = pending_server_restore_.begin(); it != pending_server_restore_.end();) {
      if (it->first <= now_ + 1e-9) {
        Mn& mn = mns_[static_cast<std::size_t>(it->second)];
        mn.alive = true;
        mn.active = true;
        mark_alive(false, it->second, true);
        it = pending_server_restore_.erase(it);
      } else {
        ++it;
      }
    }
    if (pending_plan_) {
      setup_.plan = std::move(*pending_plan_);
      pending_plan_.reset();
      for (int j : pending_activation_) mns_[static_cast<std::size_t>(j)].active = true;
      pending_activation_.clear();
    }
    if (pending_routing_) {
      for (const auto& e : pending_routing_->entries)
        if (!mns_[static_cast<std::size_t>(e.dest_mn)].alive)
          throw SimInvariantError("installed routing references dead MN " +
                                  std::to_string(e.dest_mn));
      routing_history_.emplace_back(now_, *pending_routing_);
      if (setup_.model) cost_ = make_routed_cost_model(setup_, *pending_routing_);
      pending_routing_.reset();
    }
    // stranded batches re-enter at the scatter stage under the new routing
    std::vector<std::uint64_t> to_flush;
    to_flush.swap(stranded_);
    for (auto bid : to_flush) {
      auto& rec = batches_.at(bid);
      if (rec.state != BatchState::stranded) continue;
      Cn& cn = cns_[static_cast<std::size_t>(rec.cn)];
      if (!cn.alive) {
        stranded_.push_back(bid);  // owner mid-migration; fail_cn re-homes it
        continue;
      }
      rec.state = BatchState::in_tx;
      cn.tx.q.push_back(bid);
      try_start_tx(rec.cn);
    }
  }

  void recover_cn(int cn_idx) {
    Cn& cn = cns_[static_cast<std::size_t>(cn_idx)];
    if (cn.alive) return;
    cn.alive = true;
    mark_alive(true, cn_idx, true);
    if (!cn.task_active) backup_cns_.push_back(cn_idx);  // rejoin the standby pool
  }

  void recover_mn(int mn_idx) {
    Mn& mn = mns_[static_cast<std::size_t>(mn_idx)];
    if (mn.alive) return;
    mn.alive = true;
    mark_alive(false, mn_idx, true);
    if (!mn.active) backup_mns_.push_back(mn_idx);
  }

  void mark_alive(bool is_cn, int index, bool now_alive) {
    const std::size_t slot = is_cn ? static_cast<std::size_t>(index)
                                   : cns_.size() + static_cast<std::size_t>(index);
    if (now_alive) {
      node_alive_since_[slot] = now_;
    } else if (node_alive_since_[slot] >= 0) {
      node_alive_us_[slot] += now_ - node_alive_since_[slot];
      node_alive_since_[slot] = -1.0;
    }
  }

  // --- results -----------------------------------------------------------------------

  SimResult finalize(double sla_us) {
    SimResult r;
    r.sla_us = sla_us;
    r.total_queries = queries_.size();
    r.completed_queries = completed_;
    r.total_batches = total_batches_;
    double last_completion = 0;
    for (const auto& q : queries_) {
      if (q.completed_us >= 0) {
        r.per_query_latency_us.push_back(q.completed_us - q.arrival_us);
        last_completion = std::max(last_completion, q.completed_us);
        if (q.completed_us - q.arrival_us > sla_us) ++r.sla_violations;
      }
    }
    r.horizon_us = std::max(now_, last_completion);
    r.p95_latency_us = percentile(r.per_query_latency_us, 0.95);
    if (r.horizon_us > 0)
      r.achieved_qps = static_cast<double>(completed_) / (r.horizon_us / kUsPerSec);

    const double horizon_s = r.horizon_us / kUsPerSec;
    auto add_resource = [&](const std::string& name, const Fifo& f, double tdp,
                            double alive_us) {
      const double busy_s = f.busy_us / kUsPerSec;
      const double alive_s = alive_us / kUsPerSec;
      if (horizon_s > 0) r.busy_fractions[name] = std::min(1.0, busy_s / horizon_s);
      r.energy_joules += tdp * busy_s + setup_.perf.idle_power_fraction * tdp *
                                            std::max(0.0, alive_s - busy_s);
    };
    for (std::size_t i = 0; i < cns_.size(); ++i) {
      const auto& cn = cns_[i];
      const double alive = alive_us_of(true, static_cast<int>(i), r.horizon_us);
      add_resource(cn.node_id + ".cpu", cn.cpu, setup_.power.cn_cpu_tdp, alive);
      add_resource(cn.node_id + ".tx", cn.tx, setup_.power.cn_nic_tdp, alive);
      add_resource(cn.node_id + ".rx", cn.rx, 0.0, alive);
      for (std::size_t g = 0; g < cn.gpus.size(); ++g)
        add_resource(cn.node_id + ".gpu" + std::to_string(g), cn.gpus[g],
                     setup_.power.gpu_tdp, alive);
    }
    for (std::size_t j = 0; j < mns_.size(); ++j) {
      if (setup_.deployment != Deployment::disaggregated) {
        // bundled server's memory side: power already counted with the server
        add_resource(mns_[j].node_id + ".mem", mns_[j].shard, 0.0, 0.0);
        continue;
      }
      const double alive = alive_us_of(false, static_cast<int>(j), r.horizon_us);
      add_resource(mns_[j].node_id, mns_[j].shard, setup_.power.mn_tdp, alive);
    }
    return r;
  }

  double alive_us_of(bool is_cn, int index, double horizon_us) const {
    const std::size_t slot = is_cn ? static_cast<std::size_t>(index)
                                   : cns_.size() + static_cast<std::size_t>(index);
    double total = node_alive_us_[slot];
    if (node_alive_since_[slot] >= 0) total += horizon_us - node_alive_since_[slot];
    return total;
  }

  UnitSetup setup_;
  std::shared_ptr<const StageCostModel> cost_;

  std::priority_queue<Ev, std::vector<Ev>, std::greater<>> events_;
  std::uint64_t next_seq_ = 0;
  double now_ = 0;

  std::vector<Cn> cns_;
  std::vector<Mn> mns_;
  std::map<std::string, int> node_index_;  // node_id -> encoded index
  std::map<int, int> task_owner_;          // task id -> cn index
  std::vector<int> dispatch_ring_;
  std::size_t ring_cursor_ = 0;
  std::vector<int> backup_cns_;
  std::vector<int> backup_mns_;

  std::vector<QueryRec> queries_;
  std::map<std::uint64_t, BatchRec> batches_;
  std::uint64_t total_batches_ = 0;
  std::uint64_t completed_ = 0;

  std::set<std::pair<double, std::uint64_t>> seq_queue_;
  bool seq_busy_ = false;
  std::size_t seq_outstanding_ = 0;
  std::uint64_t seq_round_ = 0;

  std::vector<std::uint64_t> stranded_;
  std::optional<RoutingTable> pending_routing_;
  std::optional<PlacementPlan> pending_plan_;
  std::vector<int> pending_activation_;
  std::vector<std::pair<double, int>> pending_server_restore_;
  int pending_installs_ = 0;
  std::uint64_t install_version_ = 0;
  std::vector<std::pair<double, RoutingTable>> routing_history_;

  std::vector<double> node_alive_since_;
  std::vector<double> node_alive_us_;

  bool log_events_ = false;
  std::vector<EventLogRow> event_log_;
};

// --- offline characterization ---------------------------------------------------

struct HillClimbPoint {
  int batch = 0;
  double rate_qps = 0;
  double qps = 0;
  double p95_us = 0;
};

struct HillClimbResult {
  double best_qps = 0;
  int best_batch = 0;
  std::vector<HillClimbPoint> points;
  std::string diagnostic;
};

// Latency-bounded throughput search: per batch size, binary-search the
// largest rate on the grid whose p95 meets the SLA, then climb over batch
// sizes until the latency-bounded QPS decreases or plateaus (relative change
// below plateau_eps).
inline HillClimbResult hill_climb_qps(
    const std::function<SimResult(int batch, double rate_qps)>& run_at, double sla_us,
    const std::vector<int>& batch_candidates, const std::vector<double>& rate_grid_qps,
    double plateau_eps = 0.01) {
  if (batch_candidates.empty() || rate_grid_qps.empty())
    throw ConfigError("hill climb: empty candidate sets");
  std::vector<double> grid = rate_grid_qps;
  std::sort(grid.begin(), grid.end());

  HillClimbResult result;
  double prev_qps = -1;
  for (int batch : batch_candidates) {
    std::size_t lo = 0, hi = grid.size();
    double best_rate = -1, best_qps = 0, best_p95 = 0;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      const SimResult r = run_at(batch, grid[mid]);
      if (r.p95_latency_us <= sla_us && r.completed_queries == r.total_queries) {
        best_rate = grid[mid];
        best_qps = r.achieved_qps;
        best_p95 = r.p95_latency_us;
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    HillClimbPoint point{batch, best_rate, best_qps, best_p95};
    result.points.push_back(point);
    if (best_rate < 0) {
      // SLA unreachable even at the minimum rate for this batch size
      if (result.best_qps == 0 && result.diagnostic.empty())
        result.diagnostic = "no rate meets the SLA at batch " + std::to_string(batch);
      if (prev_qps > 0) break;  // throughput collapsed: stop climbing
      prev_qps = 0;
      continue;
    }
    if (point.qps > result.best_qps) {
      result.best_qps = point.qps;
      result.best_batch = batch;
      result.diagnostic.clear();
    }
    if (prev_qps >= 0) {
      if (point.qps < prev_qps) break;  // past the peak
      if (prev_qps > 0 && std::abs(point.qps - prev_qps) / prev_qps < plateau_eps) break;
    }
    prev_qps = point.qps;
  }
  if (result.best_qps == 0 && result.diagnostic.empty())
    result.diagnostic = "no batch candidate sustains the SLA";
  return result;
}

// Geometric rate grid [lo, hi] with n points, for pressure-test sweeps.
inline std::vector<double> geometric_rate_grid(double lo_qps, double hi_qps, int points) {
  if (points < 2 || lo_qps <= 0 || hi_qps <= lo_qps)
    throw ConfigError("rate grid: need points >= 2 and 0 < lo < hi");
  std::vector<double> grid;
  const double step = std::pow(hi_qps / lo_qps, 1.0 / (points - 1));
  double r = lo_qps;
  for (int i = 0; i < points; ++i) {
    grid.push_back(r);
    r *= step;
  }
  return grid;
}

}  // namespace disaggsim
