#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace disaggsim {

// Byte-unit constants. Capacities are binary (GiB); model sizes in configs
// are plain bytes, so both sides of any comparison are bytes.
inline constexpr double kKiB = 1024.0;
inline constexpr double kMiB = 1024.0 * 1024.0;
inline constexpr double kGiB = 1024.0 * 1024.0 * 1024.0;
inline constexpr double kUsPerSec = 1e6;

// Converts a GiB/s link or memory rate into bytes per microsecond.
inline double bytes_per_us(double gibps) { return gibps * kGiB / kUsPerSec; }

// Time to move `bytes` at `gibps`, in microseconds.
inline double transfer_us(double bytes, double gibps) {
  return bytes / (gibps * kGiB) * kUsPerSec;
}

// Error taxonomy. The CLI maps these onto its exit codes:
// ConfigError -> 2, InfeasibleError (and subclasses) -> 3, SimInvariantError -> 4.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

class CapacityError : public InfeasibleError {
 public:
  explicit CapacityError(const std::string& msg) : InfeasibleError(msg) {}
};

class PlacementError : public InfeasibleError {
 public:
  explicit PlacementError(const std::string& msg) : InfeasibleError(msg) {}
};

class RoutingError : public InfeasibleError {
 public:
  explicit RoutingError(const std::string& msg) : InfeasibleError(msg) {}
};

class SimInvariantError : public std::logic_error {
 public:
  explicit SimInvariantError(const std::string& msg) : std::logic_error(msg) {}
};

// ceil() guarded against values that are an integer up to float noise
// (e.g. 1000/1000*1.0 coming out as 1.0000000000000002).
inline long ceil_units(double x) {
  return static_cast<long>(std::ceil(x - 1e-9));
}

// p-th percentile (p in [0,1]) by the nearest-rank rule on a copy of `v`.
inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size())));
  if (rank == 0) rank = 1;
  return v[std::min(rank, v.size()) - 1];
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Coefficient of variation (stddev / mean); 0 for empty or zero-mean input.
inline double coeff_of_variation(const std::vector<double>& v) {
  double m = mean(v);
  if (v.empty() || m == 0.0) return 0.0;
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size())) / m;
}

}  // namespace disaggsim
