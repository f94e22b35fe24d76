#include <gtest/gtest.h>

#include <cmath>

#include "disaggsim/perfmodel.hpp"

namespace disaggsim {
namespace {

const std::vector<EmbeddingTable> kOneTable = {{0, 1'000'000, 64, 4, 80.0}};

TEST(PerfModel, SparseZeroBatch) {
  EXPECT_DOUBLE_EQ(sparse_time_us(0, kOneTable, 145.0), 0.0);
}

TEST(PerfModel, SparseHandChecked) {
  // 128 x 80 x 64 x 4 B = 2,621,440 B at 145 GiB/s = 16.837 us.
  const double t = sparse_time_us(128, kOneTable, 145.0);
  EXPECT_NEAR(t, 2621440.0 / (145.0 * 1073741824.0) * 1e6, 1e-9);
  EXPECT_NEAR(t, 16.8373, 1e-3);
}

TEST(PerfModel, NmpQuarterExactly) {
  // 4x bandwidth divides the time by exactly 4, bit for bit.
  const double ddr = sparse_time_us(128, kOneTable, 145.0);
  const double nmp = sparse_time_us(128, kOneTable, 4 * 145.0);
  EXPECT_EQ(nmp, 0.25 * ddr);
  const double ddr_w = sparse_time_us(64, 5120.0, 4, 145.0);
  const double nmp_w = sparse_time_us(64, 5120.0, 4, 4 * 145.0);
  EXPECT_EQ(nmp_w, 0.25 * ddr_w);
}

TEST(PerfModel, SparseLinearInBatchAndBandwidth) {
  const double t1 = sparse_time_us(100, kOneTable, 145.0);
  EXPECT_NEAR(sparse_time_us(200, kOneTable, 145.0), 2.0 * t1, 1e-9);
  EXPECT_NEAR(sparse_time_us(100, kOneTable, 290.0), 0.5 * t1, 1e-12);
}

TEST(PerfModel, CommScatterHandChecked) {
  // 128 x 80 x 4 B = 40,960 B at 25 GiB/s + 2 us message latency.
  const LinkModel net{25.0, 2.0};
  const double t = comm_time_us(128, kOneTable, net, CommDirection::scatter_indices);
  EXPECT_NEAR(t, 40960.0 / (25.0 * 1073741824.0) * 1e6 + 2.0, 1e-9);
  EXPECT_NEAR(t, 3.5259, 1e-3);
}

TEST(PerfModel, CommGatherHandChecked) {
  // 128 x 64 x 4 B = 32,768 B at 25 GiB/s + 2 us.
  const LinkModel net{25.0, 2.0};
  const double t = comm_time_us(128, kOneTable, net, CommDirection::gather_fsum);
  EXPECT_NEAR(t, 32768.0 / (25.0 * 1073741824.0) * 1e6 + 2.0, 1e-9);
  EXPECT_NEAR(t, 3.2207, 1e-3);
}

TEST(PerfModel, CommZeroTablesIsLatencyOnly) {
  const LinkModel net{25.0, 2.0};
  EXPECT_DOUBLE_EQ(comm_time_us(128, {}, net, CommDirection::scatter_indices), 2.0);
}

TEST(PerfModel, DenseHandChecked) {
  // 128 samples x 2 GFLOPs each = 256 GFLOP at 20 TFLOPS = 12.8 ms.
  EXPECT_DOUBLE_EQ(dense_time_us(0, 2.0, 20.0), 0.0);
  EXPECT_NEAR(dense_time_us(128, 2.0, 20.0), 12800.0, 1e-9);
  // Doubling the effective TFLOPS halves the time exactly.
  EXPECT_EQ(dense_time_us(128, 2.0, 40.0), 0.5 * dense_time_us(128, 2.0, 20.0));
}

TEST(PerfModel, NumaNaiveHandChecked) {
  // 2 MiB total: 1 MiB per socket half; the 52 GiB/s remote half dominates.
  std::vector<EmbeddingTable> tables = {{0, 1, 64, 4, 1.0}};
  // Pick batch/pooling so total bytes are exactly 2 MiB: 2^21 / (64*4) = 8192 lookups.
  tables[0].avg_pooling_factor = 8192.0;
  const double total = sparse_bytes(1, tables);
  ASSERT_DOUBLE_EQ(total, 2.0 * 1024 * 1024);
  const double naive = numa_sparse_time_us(1, tables, NumaMode::naive);
  EXPECT_NEAR(naive, 1048576.0 / (52.0 * 1073741824.0) * 1e6, 1e-9);
  EXPECT_NEAR(naive, 18.78, 0.01);
  const double aware = numa_sparse_time_us(1, tables, NumaMode::numa_aware);
  EXPECT_NEAR(aware, 1048576.0 / (145.0 * 1073741824.0) * 1e6, 1e-9);
  EXPECT_NEAR(aware, 6.7349, 1e-3);
}

TEST(PerfModel, NumaZeroBytes) {
  EXPECT_DOUBLE_EQ(numa_sparse_time_us(0, kOneTable, NumaMode::naive), 0.0);
  EXPECT_DOUBLE_EQ(numa_sparse_time_us(5, {}, NumaMode::numa_aware), 0.0);
}

TEST(PerfModel, NumaAwareBeatsNaiveOnRandomTables) {
  // Whenever remote bandwidth < local and the index/Fsum payload is smaller
  // than the raw embedding payload, sharding wins even with UPI comm added.
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<EmbeddingTable> tables;
    const int n = 1 + static_cast<int>(rng.uniform_int(0, 19));
    for (int i = 0; i < n; ++i) {
      const int dim = 16 << rng.uniform_int(0, 3);
      tables.push_back({i, 1000, dim, 4, std::max(1.0, rng.lognormal(std::log(80.0), 0.5))});
    }
    const int batch = 1 + static_cast<int>(rng.uniform_int(0, 255));
    const double naive = numa_sparse_time_us(batch, tables, NumaMode::naive);
    const double aware = numa_sparse_time_us(batch, tables, NumaMode::numa_aware) +
                         numa_aware_comm_us(batch, tables);
    EXPECT_LT(aware, naive) << "trial " << trial;
  }
}

TEST(PerfModel, StageCostsAggregation) {
  StageCosts costs;
  costs.preprocess_us = 10;
  costs.sparse_us_per_mn = {{0, 30.0}, {1, 50.0}, {2, 20.0}};
  costs.scatter_us = 5;
  costs.gather_us = 4;
  costs.dense_us = 11;
  EXPECT_DOUBLE_EQ(costs.sparse_us(), 50.0);  // parallel shards: max over MNs
  EXPECT_DOUBLE_EQ(costs.total_us(), 10 + 5 + 50 + 4 + 11);
}

}  // namespace
}  // namespace disaggsim
