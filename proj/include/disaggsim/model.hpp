#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "disaggsim/common.hpp"
#include "disaggsim/rng.hpp"

namespace disaggsim {

// One sparse embedding table. access_weight is the traffic proxy used by
// routing and the sparse-stage model: elements touched per sample.
struct EmbeddingTable {
  int table_id = 0;
  std::uint64_t num_rows = 0;
  int dim = 0;
  int element_bytes = 4;
  double avg_pooling_factor = 1.0;  // mean lookups per sample, profiled

  std::uint64_t size_bytes() const {
    return num_rows * static_cast<std::uint64_t>(dim) *
           static_cast<std::uint64_t>(element_bytes);
  }
  double access_weight() const { return avg_pooling_factor * dim; }
};

// A model generation: its sparse tables plus the dense and preprocessing
// cost knobs the performance model consumes.
struct ModelSpec {
  std::string model_id;
  std::vector<EmbeddingTable> tables;
  double dense_gflops_per_sample = 0;
  double preprocess_cost_us_per_sample = 0;

  std::uint64_t total_sparse_bytes() const {
    std::uint64_t sum = 0;
    for (const auto& t : tables) sum += t.size_bytes();
    return sum;
  }
  double total_pooling() const {
    double sum = 0;
    for (const auto& t : tables) sum += t.avg_pooling_factor;
    return sum;
  }
  double total_dim() const {
    double sum = 0;
    for (const auto& t : tables) sum += t.dim;
    return sum;
  }
  double total_access_weight() const {
    double sum = 0;
    for (const auto& t : tables) sum += t.access_weight();
    return sum;
  }
};

// Hash cost per embedding lookup on the preprocessing stage, single default
// for synthesized models; overridable per model.
inline constexpr double kPreprocessUsPerLookup = 0.05;

// Synthesizes n_tables whose sizes are lognormal draws rescaled so the sum
// lands on total_bytes (to within rounding of whole rows). Dims cycle through
// dim_choices by draw; pooling factors are lognormal(mu, sigma). Deterministic
// per seed.
inline std::vector<EmbeddingTable> synth_tables(std::uint64_t total_bytes, int n_tables,
                                                const std::vector<int>& dim_choices,
                                                double pooling_mu_log,
                                                double pooling_sigma_log,
                                                std::uint64_t seed,
                                                int element_bytes = 4) {
  if (n_tables < 1) throw ConfigError("synth_tables: n_tables must be >= 1");
  if (dim_choices.empty()) throw ConfigError("synth_tables: empty dim_choices");
  int min_dim = dim_choices[0];
  for (int d : dim_choices) min_dim = std::min(min_dim, d);
  if (total_bytes < static_cast<std::uint64_t>(n_tables) *
                        static_cast<std::uint64_t>(min_dim) *
                        static_cast<std::uint64_t>(element_bytes))
    throw CapacityError("synth_tables: total_bytes too small for " +
                        std::to_string(n_tables) + " tables");

  Rng rng(seed);
  std::vector<double> raw(static_cast<std::size_t>(n_tables));
  std::vector<int> dims(static_cast<std::size_t>(n_tables));
  std::vector<double> pooling(static_cast<std::size_t>(n_tables));
  double raw_sum = 0;
  for (int i = 0; i < n_tables; ++i) {
    raw[static_cast<std::size_t>(i)] = rng.lognormal(0.0, 1.0);
    raw_sum += raw[static_cast<std::size_t>(i)];
    dims[static_cast<std::size_t>(i)] =
        dim_choices[rng.uniform_int(0, dim_choices.size() - 1)];
    pooling[static_cast<std::size_t>(i)] =
        std::max(1.0, rng.lognormal(pooling_mu_log, pooling_sigma_log));
  }

  std::vector<EmbeddingTable> tables;
  tables.reserve(static_cast<std::size_t>(n_tables));
  for (int i = 0; i < n_tables; ++i) {
    const double target = static_cast<double>(total_bytes) *
                          raw[static_cast<std::size_t>(i)] / raw_sum;
    const double row_bytes =
        static_cast<double>(dims[static_cast<std::size_t>(i)]) * element_bytes;
    const auto rows =
        static_cast<std::uint64_t>(std::max<long long>(1, std::llround(target / row_bytes)));
    tables.push_back({i, rows, dims[static_cast<std::size_t>(i)], element_bytes,
                      pooling[static_cast<std::size_t>(i)]});
  }
  return tables;
}

// Convenience builder for the default synthetic model shape: dims drawn from
// {32, 64, 128}, lognormal pooling around 80.
inline ModelSpec synth_model(const std::string& model_id, std::uint64_t total_bytes,
                             int n_tables, std::uint64_t seed,
                             double dense_gflops_per_sample = 0.1) {
  ModelSpec m;
  m.model_id = model_id;
  m.tables = synth_tables(total_bytes, n_tables, {32, 64, 128}, std::log(80.0), 0.5, seed);
  m.dense_gflops_per_sample = dense_gflops_per_sample;
  m.preprocess_cost_us_per_sample = kPreprocessUsPerLookup * m.total_pooling();
  return m;
}

// Six model generations spanning three years. Sizes between the endpoints
// follow a geometric curve; both growth axes are independent.
struct GenerationSeries {
  ModelSpec base;
  int num_generations = 6;
  double sparse_growth_total = 1.0;
  double dense_growth_total = 1.0;
};

// Generation k of a series. Sparse growth scales every table's row count by
// growth^(k/(G-1)); the last table absorbs rounding so the endpoint totals
// are exact to well under 1e-9 relative. Dense growth scales FLOPs only.
inline ModelSpec make_generation(const GenerationSeries& series, int k) {
  if (k < 0 || k >= series.num_generations)
    throw ConfigError("generation index " + std::to_string(k) + " out of range [0, " +
                      std::to_string(series.num_generations) + ")");
  const double exponent =
      static_cast<double>(k) / static_cast<double>(series.num_generations - 1);
  const double sparse_factor = std::pow(series.sparse_growth_total, exponent);
  const double dense_factor = std::pow(series.dense_growth_total, exponent);

  ModelSpec out = series.base;
  out.model_id = series.base.model_id + ".V" + std::to_string(k);
  out.dense_gflops_per_sample = series.base.dense_gflops_per_sample * dense_factor;

  const double target_total =
      static_cast<double>(series.base.total_sparse_bytes()) * sparse_factor;
  double placed = 0;
  for (std::size_t i = 0; i < out.tables.size(); ++i) {
    auto& t = out.tables[i];
    const double row_bytes = static_cast<double>(t.dim) * t.element_bytes;
    double want_rows;
    if (i + 1 == out.tables.size()) {
      want_rows = (target_total - placed) / row_bytes;  // absorb rounding drift
    } else {
      want_rows = static_cast<double>(t.num_rows) * sparse_factor;
    }
    t.num_rows = static_cast<std::uint64_t>(std::max<long long>(1, std::llround(want_rows)));
    placed += static_cast<double>(t.size_bytes());
  }
  return out;
}

// RM1: memory-intensive series, 1.4 TB -> 7.8 TB sparse over six generations.
// Its dense growth is not quantified in the projections; 2x is the assumed
// default, overridable in experiment configs.
inline GenerationSeries make_rm1_series(std::uint64_t seed = 1,
                                        int n_tables = 1000) {
  GenerationSeries s;
  s.base = synth_model("RM1", static_cast<std::uint64_t>(1.4e12), n_tables, seed, 0.1);
  s.sparse_growth_total = 7.8 / 1.4;
  s.dense_growth_total = 2.0;
  return s;
}

// RM2: compute-intensive series, dense FLOPs grow 18.9x over six generations.
// Sparse growth defaults to an assumed mild 2x.
inline GenerationSeries make_rm2_series(std::uint64_t seed = 2,
                                        int n_tables = 1000) {
  GenerationSeries s;
  s.base = synth_model("RM2", static_cast<std::uint64_t>(1.0e12), n_tables, seed, 0.6);
  s.sparse_growth_total = 2.0;
  s.dense_growth_total = 18.9;
  return s;
}

}  // namespace disaggsim
