#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "disaggsim/common.hpp"
#include "disaggsim/rng.hpp"

namespace disaggsim {

struct Query {
  std::uint64_t query_id = 0;
  double arrival_time_us = 0;
  int num_samples = 1;
};

// Per-interval arrival rates over a day (or any horizon). load(t) of the
// allocation constraint reads from here.
struct LoadCurve {
  double interval_s = 600.0;
  std::vector<double> rates_qps;

  double peak_qps() const {
    double peak = 0;
    for (double r : rates_qps) peak = std::max(peak, r);
    return peak;
  }
  double duration_s() const {
    return interval_s * static_cast<double>(rates_qps.size());
  }
  void validate() const {
    if (interval_s <= 0) throw ConfigError("load curve: interval_s must be > 0");
    for (double r : rates_qps)
      if (r <= 0) throw ConfigError("load curve: rates must be positive");
  }
};

inline LoadCurve constant_curve(double qps, double duration_s, double interval_s = 600.0) {
  LoadCurve c;
  c.interval_s = interval_s;
  const int n = std::max(1, static_cast<int>(std::ceil(duration_s / interval_s)));
  // shrink the last interval implicitly by trimming total duration at gen time
  c.rates_qps.assign(static_cast<std::size_t>(n), qps);
  c.interval_s = duration_s / n;
  return c;
}

// Diurnal sinusoid: trough = trough_ratio * peak, maximum at peak_hour.
inline LoadCurve diurnal_curve(double peak_qps, double peak_hour = 20.0,
                               double trough_ratio = 0.5, double interval_s = 600.0,
                               double hours = 24.0) {
  LoadCurve c;
  c.interval_s = interval_s;
  const int n = static_cast<int>(std::llround(hours * 3600.0 / interval_s));
  const double mid = (1.0 + trough_ratio) / 2.0;
  const double amp = (1.0 - trough_ratio) / 2.0;
  for (int i = 0; i < n; ++i) {
    const double hour = (static_cast<double>(i) + 0.5) * interval_s / 3600.0;
    c.rates_qps.push_back(peak_qps *
                          (mid + amp * std::cos(2.0 * M_PI * (hour - peak_hour) / 24.0)));
  }
  return c;
}

// Heavy-tailed query sizes: lognormal, truncated to [min_samples, max_samples].
struct QuerySizeDist {
  double mu_log = std::log(32.0);
  double sigma_log = 1.2;
  int min_samples = 1;
  int max_samples = 4096;

  int sample(Rng& rng) const {
    const auto s = static_cast<long long>(std::llround(rng.lognormal(mu_log, sigma_log)));
    return static_cast<int>(std::clamp<long long>(s, min_samples, max_samples));
  }
};

inline QuerySizeDist fixed_size_dist(int samples) {
  return QuerySizeDist{std::log(static_cast<double>(samples)), 0.0, samples, samples};
}

// Poisson arrivals within each interval at that interval's rate; sizes i.i.d.
// from the size distribution. Deterministic per seed.
inline std::vector<Query> gen_trace(const LoadCurve& curve, const QuerySizeDist& sizes,
                                    std::uint64_t seed) {
  std::vector<Query> trace;
  if (curve.rates_qps.empty()) return trace;
  curve.validate();
  Rng rng(seed);
  std::uint64_t next_id = 0;
  const double interval_us = curve.interval_s * kUsPerSec;
  for (std::size_t i = 0; i < curve.rates_qps.size(); ++i) {
    const double start_us = static_cast<double>(i) * interval_us;
    const double end_us = start_us + interval_us;
    const double mean_gap_us = kUsPerSec / curve.rates_qps[i];
    double t = start_us + rng.exponential(mean_gap_us);
    while (t < end_us) {
      trace.push_back({next_id++, t, sizes.sample(rng)});
      t += rng.exponential(mean_gap_us);
    }
  }
  return trace;
}

// A slice of queries executed together. Queries larger than the batch limit
// span several batches; parts record how many of each query's samples ride
// in this one.
struct BatchPart {
  std::uint64_t query_id = 0;
  int num_samples = 0;
};

struct Batch {
  std::uint64_t batch_id = 0;
  std::vector<BatchPart> parts;
  int num_samples = 0;
  double formed_time_us = 0;

  std::vector<std::uint64_t> member_query_ids() const {
    std::vector<std::uint64_t> ids;
    ids.reserve(parts.size());
    for (const auto& p : parts) ids.push_back(p.query_id);
    return ids;
  }
};

// Sample-granular FIFO batcher. Emits when the open batch fills to max_batch
// or when max_wait_us has elapsed since its first sample. Large queries split
// into ceil(size/max_batch) sub-batches; small queries fuse.
class Batcher {
 public:
  Batcher(int max_batch, double max_wait_us, std::uint64_t first_batch_id = 0)
      : max_batch_(max_batch), max_wait_us_(max_wait_us), next_id_(first_batch_id) {
    if (max_batch < 1) throw ConfigError("batcher: max_batch must be >= 1");
  }

  // Feeds one query; returns every batch the arrival completed.
  std::vector<Batch> on_query(const Query& q, double now_us) {
    std::vector<Batch> out;
    int remaining = q.num_samples;
    while (remaining > 0) {
      if (open_.parts.empty()) open_since_us_ = now_us;
      const int take = std::min(remaining, max_batch_ - open_.num_samples);
      open_.parts.push_back({q.query_id, take});
      open_.num_samples += take;
      remaining -= take;
      if (open_.num_samples == max_batch_) out.push_back(seal(now_us));
    }
    return out;
  }

  // Timeout deadline of the open batch, if one is pending.
  std::optional<double> deadline_us() const {
    if (open_.parts.empty()) return std::nullopt;
    return open_since_us_ + max_wait_us_;
  }

  // Emits the open batch (deadline expiry or forced flush).
  std::optional<Batch> flush(double now_us) {
    if (open_.parts.empty()) return std::nullopt;
    return seal(now_us);
  }

  bool has_open() const { return !open_.parts.empty(); }

  // Hands the partially-filled state to another batcher (task migration).
  void move_open_to(Batcher& other, double now_us) {
    for (const auto& part : open_.parts) {
      Query q{part.query_id, now_us, part.num_samples};
      other.on_query(q, now_us);  // cannot fill past max_batch: same limit
    }
    open_ = Batch{};
  }

 private:
  Batch seal(double now_us) {
    Batch b = std::move(open_);
    b.batch_id = next_id_++;
    b.formed_time_us = now_us;
    open_ = Batch{};
    return b;
  }

  int max_batch_;
  double max_wait_us_;
  std::uint64_t next_id_;
  Batch open_;
  double open_since_us_ = 0;
};

// Offline batching of a whole trace on a virtual timeline: deadline expiries
// fire between arrivals, and the final partial batch emits at its deadline.
inline std::vector<Batch> batch_trace(const std::vector<Query>& queries, int max_batch,
                                      double max_wait_us) {
  Batcher batcher(max_batch, max_wait_us);
  std::vector<Batch> out;
  for (const auto& q : queries) {
    while (auto dl = batcher.deadline_us()) {
      if (*dl > q.arrival_time_us) break;
      if (auto b = batcher.flush(*dl)) out.push_back(std::move(*b));
    }
    auto emitted = batcher.on_query(q, q.arrival_time_us);
    for (auto& b : emitted) out.push_back(std::move(b));
  }
  if (auto dl = batcher.deadline_us()) {
    if (auto b = batcher.flush(*dl)) out.push_back(std::move(*b));
  }
  return out;
}

}  // namespace disaggsim
