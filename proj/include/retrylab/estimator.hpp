// Final throughput bounds: hardware expansion and logical conflicts combined
// through a fixed-point search on the retry-loop occupancy, plus pw sweeps
// and the model-driven back-off value.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "retrylab/expansion.hpp"
#include "retrylab/logical.hpp"
#include "retrylab/model.hpp"

namespace retrylab {

enum class BoundSide {
  kFewFails,   // f_min side, upper throughput bound
  kManyFails,  // f_max side, lower throughput bound
};

struct FixedPointResult {
  bool converged = false;
  double occupancy = 0.0;
  double expansion = 0.0;
  long fails = 0;
  double throughput_retry_units = 0.0;  // successes per retry unit
  double retry_cost = 0.0;              // expanded rlw
  long whole = 0;
  double fraction = 0.0;
  std::vector<double> iterates;
};

namespace detail {

struct OccupancyMap {
  const PlatformProfile& profile;
  double parallel_work;
  double min_cost;
  const ExpansionCurve* curve;  // null when expansion is off
  BoundSide side;

  struct Point {
    double occupancy;
    double expansion;
    long fails;
    long whole;
    double fraction;
    double retry_cost;
  };

  Point eval(double x) const {
    double e = 0.0;
    if (curve != nullptr) {
      const double clamped = std::min(x, static_cast<double>(profile.threads));
      e = expansion_at(*curve, clamped);
    }
    const double rlw = min_cost + e;
    const NormalizedWork nw = normalize(parallel_work + e, rlw);
    const FailureBounds fb = failure_bounds(profile.threads, nw.whole, nw.fraction);
    const long f = (side == BoundSide::kFewFails) ? fb.min_fails : fb.max_fails;
    const double period = static_cast<double>(nw.whole) + nw.fraction + 1.0 +
                          static_cast<double>(f);
    const double occ = static_cast<double>(profile.threads) *
                       static_cast<double>(f + 1) / period;
    return Point{occ, e, f, nw.whole, nw.fraction, rlw};
  }
};

}  // namespace detail

// Iterates x_{n+1} = h(x_n) from x_0 = 0, where h maps an assumed occupancy
// to the occupancy of the cyclic execution it induces (expansion first, then
// normalization and the failure bound for the requested side). Expansion
// onset sits at occupancy 1 for the few-fails side and 1/2 for the many-fails
// side, matching the pw thresholds (P-1)rlw and (2P-1)rlw. Below one retry of
// parallel work the map loses monotonicity and the solution interval is
// scanned for the smallest fixed point instead.
inline FixedPointResult fixed_point_occupancy(const PlatformProfile& profile,
                                              const WorkloadSpec& workload, BoundSide side,
                                              double tolerance = 1e-6, int max_iter = 1000) {
  profile.validate();
  workload.validate();
  const double min_cost = min_retry_cost(profile, workload);
  const double p = static_cast<double>(profile.threads);

  ExpansionCurve curve;
  const bool expansion_on = profile.cas_latency > 0.0 && profile.threads > 1;
  if (expansion_on) {
    const double onset = (side == BoundSide::kFewFails) ? 1.0 : 0.5;
    curve = solve_expansion(profile, workload.critical_work, onset, p);
  }
  detail::OccupancyMap map{profile, workload.parallel_work, min_cost,
                           expansion_on ? &curve : nullptr, side};

  FixedPointResult result;
  double solution = 0.0;
  if (workload.parallel_work >= min_cost) {
    double x = 0.0;
    for (int i = 0; i < max_iter; ++i) {
      const double next = map.eval(x).occupancy;
      result.iterates.push_back(next);
      if (std::abs(next - x) < tolerance) {
        result.converged = true;
        solution = next;
        break;
      }
      x = next;
    }
  } else {
    // Scan [0, P] on a fixed grid and bisect the first crossing of h(x) = x.
    const double step = 1.0 / 256.0;
    double lo = 0.0;
    double g_lo = map.eval(lo).occupancy - lo;
    bool bracketed = false;
    for (double x = step; x <= p + step / 2; x += step) {
      const double hi = std::min(x, p);
      const double g_hi = map.eval(hi).occupancy - hi;
      if (g_lo >= 0.0 && g_hi <= 0.0) {
        double a = lo, b = hi;
        for (int i = 0; i < 64; ++i) {
          const double mid = 0.5 * (a + b);
          if (map.eval(mid).occupancy - mid >= 0.0) a = mid;
          else b = mid;
        }
        solution = 0.5 * (a + b);
        bracketed = true;
        break;
      }
      lo = hi;
      g_lo = g_hi;
    }
    result.converged = bracketed;
    if (bracketed) result.iterates.push_back(solution);
  }
  if (!result.converged) return result;

  const auto pt = map.eval(solution);
  result.occupancy = pt.occupancy;
  result.expansion = pt.expansion;
  result.fails = pt.fails;
  result.whole = pt.whole;
  result.fraction = pt.fraction;
  result.retry_cost = pt.retry_cost;
  result.throughput_retry_units =
      p / (static_cast<double>(pt.whole) + pt.fraction + 1.0 + static_cast<double>(pt.fails));
  return result;
}

struct ThroughputEstimate {
  double parallel_work = 0.0;
  double thr_low = 0.0;   // successes per cycle, many-fails side
  double thr_high = 0.0;  // few-fails side
  double thr_avg = 0.0;
  double fails_low = 0.0;   // f on the few-fails side
  double fails_high = 0.0;  // f on the many-fails side
  double expansion_low = 0.0;
  double expansion_high = 0.0;
  double occupancy_low = 0.0;
  double occupancy_high = 0.0;
  bool converged = false;
};

inline ThroughputEstimate estimate(const PlatformProfile& profile, const WorkloadSpec& workload) {
  const FixedPointResult few = fixed_point_occupancy(profile, workload, BoundSide::kFewFails);
  const FixedPointResult many = fixed_point_occupancy(profile, workload, BoundSide::kManyFails);
  ThroughputEstimate est;
  est.parallel_work = workload.parallel_work;
  est.converged = few.converged && many.converged;
  if (!est.converged) return est;
  est.thr_high = few.throughput_retry_units / few.retry_cost;
  est.thr_low = many.throughput_retry_units / many.retry_cost;
  est.thr_avg = 0.5 * (est.thr_low + est.thr_high);
  est.fails_low = static_cast<double>(few.fails);
  est.fails_high = static_cast<double>(many.fails);
  est.expansion_low = few.expansion;
  est.expansion_high = many.expansion;
  est.occupancy_low = few.occupancy;
  est.occupancy_high = many.occupancy;
  return est;
}

inline std::vector<ThroughputEstimate> sweep(const PlatformProfile& profile,
                                             const WorkloadSpec& workload_template,
                                             const std::vector<double>& pw_grid) {
  if (pw_grid.empty()) throw std::invalid_argument("sweep needs a non-empty grid");
  for (std::size_t i = 1; i < pw_grid.size(); ++i) {
    if (!(pw_grid[i - 1] < pw_grid[i])) {
      throw std::invalid_argument("sweep grid must be strictly increasing");
    }
  }
  std::vector<ThroughputEstimate> out;
  out.reserve(pw_grid.size());
  for (const double pw : pw_grid) {
    WorkloadSpec w = workload_template;
    w.parallel_work = pw;
    out.push_back(estimate(profile, w));
  }
  return out;
}

// Pads the parallel section up to the peak of the average curve.
struct BackoffRecommendation {
  double peak_parallel_work = 0.0;
  bool boundary_warning = false;

  double backoff_for(double parallel_work) const {
    return std::max(0.0, peak_parallel_work - parallel_work);
  }
};

inline BackoffRecommendation recommend_backoff(const PlatformProfile& profile,
                                               const WorkloadSpec& workload_template,
                                               const std::vector<double>& search_grid) {
  const auto estimates = sweep(profile, workload_template, search_grid);
  std::size_t best = 0;
  for (std::size_t i = 1; i < estimates.size(); ++i) {
    if (estimates[i].thr_avg > estimates[best].thr_avg) best = i;
  }
  BackoffRecommendation rec;
  rec.peak_parallel_work = search_grid[best];
  rec.boundary_warning = (best == 0 || best + 1 == estimates.size()) && estimates.size() > 1;
  return rec;
}

}  // namespace retrylab
