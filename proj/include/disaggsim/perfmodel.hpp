#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "disaggsim/common.hpp"
#include "disaggsim/model.hpp"

namespace disaggsim {

// A point-to-point transfer path: peak rate plus a fixed per-message setup
// cost (RDMA-class defaults).
struct LinkModel {
  double bandwidth_gibps = 25.0;
  double per_message_latency_us = 2.0;

  double message_us(double bytes) const {
    return transfer_us(bytes, bandwidth_gibps) + per_message_latency_us;
  }
};

enum class CommDirection { scatter_indices, gather_fsum };

// Analytic per-stage durations for one batch. The sparse stage of a sharded
// batch is the max over its MNs (shards run in parallel).
struct StageCosts {
  double preprocess_us = 0;
  std::map<int, double> sparse_us_per_mn;
  double scatter_us = 0;
  double gather_us = 0;
  double dense_us = 0;

  double sparse_us() const {
    double worst = 0;
    for (const auto& [mn, us] : sparse_us_per_mn) worst = std::max(worst, us);
    return worst;
  }
  double total_us() const {
    return preprocess_us + scatter_us + sparse_us() + gather_us + dense_us;
  }
};

inline constexpr int kIndexBytes = 4;
inline constexpr int kFsumElementBytes = 4;

inline double sparse_bytes(int batch, const std::vector<EmbeddingTable>& tables) {
  double per_sample = 0;
  for (const auto& t : tables) per_sample += t.access_weight() * t.element_bytes;
  return static_cast<double>(batch) * per_sample;
}

// Embedding lookup + pooling time for one batch against one memory system:
// bytes touched / memory bandwidth. An NMP memory node simply passes 4x the
// DDR bandwidth here, which makes the speedup exactly linear.
inline double sparse_time_us(int batch, const std::vector<EmbeddingTable>& tables,
                             double mem_bw_gibps) {
  if (mem_bw_gibps <= 0) throw ConfigError("sparse_time: bandwidth must be > 0");
  return transfer_us(sparse_bytes(batch, tables), mem_bw_gibps);
}

// Weight-sum form used by the simulator once routing has aggregated tables.
inline double sparse_time_us(int batch, double access_weight_sum, int element_bytes,
                             double mem_bw_gibps) {
  return transfer_us(static_cast<double>(batch) * access_weight_sum * element_bytes,
                     mem_bw_gibps);
}

inline double comm_bytes(int batch, const std::vector<EmbeddingTable>& tables,
                         CommDirection dir) {
  double per_sample = 0;
  for (const auto& t : tables)
    per_sample += dir == CommDirection::scatter_indices
                      ? t.avg_pooling_factor * kIndexBytes
                      : static_cast<double>(t.dim) * kFsumElementBytes;
  return static_cast<double>(batch) * per_sample;
}

// One aggregate transfer of the embeddings' inputs (lookup indices) or
// outputs (pooled Fsum vectors): bytes / bandwidth + per-message latency.
inline double comm_time_us(int batch, const std::vector<EmbeddingTable>& tables,
                           const LinkModel& link, CommDirection dir) {
  if (link.bandwidth_gibps <= 0) throw ConfigError("comm_time: bandwidth must be > 0");
  return link.message_us(comm_bytes(batch, tables, dir));
}

// Fully-connected stage on one DenseNet replica. Batches spread round-robin
// across GPU replicas at the simulator level, so this costs a single replica.
inline double dense_time_us(int batch, double dense_gflops_per_sample,
                            double gpu_effective_tflops) {
  if (gpu_effective_tflops <= 0) throw ConfigError("dense_time: TFLOPS must be > 0");
  // GFLOP / (TFLOP/s * 1000) = seconds
  const double seconds =
      static_cast<double>(batch) * dense_gflops_per_sample / (gpu_effective_tflops * 1000.0);
  return seconds * kUsPerSec;
}

enum class NumaMode { naive, numa_aware };

// Measured scale-up rates: an unpartitioned SparseNet drives half its
// accesses through the local socket (93 GiB/s) and half across UPI
// (52 GiB/s); socket-local sharding restores the 145 GiB/s local rate.
struct NumaParams {
  double naive_local_gibps = 93.0;
  double naive_remote_gibps = 52.0;
  double aware_local_gibps = 145.0;
  LinkModel upi{55.0, 0.5};
  int sockets = 2;
};

// Scale-up sparse stage. naive: the slower half dominates. numa_aware: each
// socket pools its half locally, and only that shard's indices and Fsum
// (half the model's) cross the UPI link.
inline double numa_sparse_time_us(int batch, const std::vector<EmbeddingTable>& tables,
                                  NumaMode mode, const NumaParams& p = {}) {
  const double total = sparse_bytes(batch, tables);
  if (total == 0) return 0;
  const double half = total / p.sockets;
  if (mode == NumaMode::naive)
    return std::max(transfer_us(half, p.naive_local_gibps),
                    transfer_us(half, p.naive_remote_gibps));
  return transfer_us(half, p.aware_local_gibps);
}

// UPI traffic of the numa_aware variant: the remote shard's indices out and
// Fsum back, i.e. half of each payload.
inline double numa_aware_comm_us(int batch, const std::vector<EmbeddingTable>& tables,
                                 const NumaParams& p = {}) {
  const double idx = comm_bytes(batch, tables, CommDirection::scatter_indices) / p.sockets;
  const double fsum = comm_bytes(batch, tables, CommDirection::gather_fsum) / p.sockets;
  return p.upi.message_us(idx) + p.upi.message_us(fsum);
}

// Perf knobs shared by the simulator; every constant is config-overridable.
struct PerfParams {
  double gpu_effective_tflops = 20.0;
  LinkModel network{25.0, 2.0};
  NumaParams numa{};
  double idle_power_fraction = 0.3;
};

}  // namespace disaggsim
