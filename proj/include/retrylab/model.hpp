// Shared parameter types, retry-unit normalization, the immediate throughput
// upper bound, and the multi-retry-loop reduction.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "retrylab/rational.hpp"

namespace retrylab {

// Hardware latencies in CPU cycles plus the number of worker threads.
struct PlatformProfile {
  double read_latency = 0.0;  // rc: Read on a line owned elsewhere
  double cas_latency = 0.0;   // cc: CAS on the shared access point
  int threads = 1;            // P

  void validate() const {
    if (!(read_latency > 0.0)) throw std::invalid_argument("read latency must be > 0");
    if (!(cas_latency >= 0.0)) throw std::invalid_argument("cas latency must be >= 0");
    if (threads < 1) throw std::invalid_argument("thread count must be >= 1");
  }
};

enum class PwDistribution { kConstant, kPoissonMean };

// Work sizes in cycles. The analytical model always consumes the mean;
// the distribution only matters to the simulator and the bench.
struct WorkloadSpec {
  double parallel_work = 0.0;  // pw
  double critical_work = 0.0;  // cw
  PwDistribution distribution = PwDistribution::kConstant;

  void validate() const {
    if (!(parallel_work >= 0.0)) throw std::invalid_argument("parallel work must be >= 0");
    if (!(critical_work >= 0.0)) throw std::invalid_argument("critical work must be >= 0");
  }
};

// Parallel-section length expressed in retry units: q whole retries plus a
// fraction r in [0,1).
struct NormalizedWork {
  long whole = 0;          // q
  double fraction = 0.0;   // r
  double retry_cost = 0.0; // cycles per retry used for the normalization
};

struct NormalizedWorkExact {
  BigInt whole;
  Rat fraction;
  Rat retry_cost;
};

// Minimum cost of one retry: rc + cw + cc.
inline double min_retry_cost(const PlatformProfile& profile, const WorkloadSpec& workload) {
  profile.validate();
  workload.validate();
  return profile.read_latency + workload.critical_work + profile.cas_latency;
}

inline NormalizedWork normalize(double parallel_cycles, double retry_cycles) {
  if (!(retry_cycles > 0.0)) throw std::invalid_argument("retry cost must be > 0");
  if (!(parallel_cycles >= 0.0)) throw std::invalid_argument("parallel work must be >= 0");
  const double ratio = parallel_cycles / retry_cycles;
  double q = std::floor(ratio);
  double r = ratio - q;
  if (r >= 1.0) {  // floor rounding at representability edges
    q += 1.0;
    r = 0.0;
  }
  return NormalizedWork{static_cast<long>(q), r, retry_cycles};
}

inline NormalizedWorkExact normalize(const Rat& parallel, const Rat& retry) {
  if (!(retry > 0)) throw std::invalid_argument("retry cost must be > 0");
  if (parallel < 0) throw std::invalid_argument("parallel work must be >= 0");
  const Rat ratio = parallel / retry;
  BigInt q = rat_floor(ratio);
  return NormalizedWorkExact{q, ratio - Rat(q), retry};
}

// Immediate bound: 1/rlw- while the retry loop is the bottleneck,
// P/(pw+rlw-) once the threads are.
inline double immediate_upper_bound(const PlatformProfile& profile, const WorkloadSpec& workload) {
  const double rlw = min_retry_cost(profile, workload);
  const double pw = workload.parallel_work;
  const double p = static_cast<double>(profile.threads);
  if (pw <= (p - 1.0) * rlw) return 1.0 / rlw;
  return p / (pw + rlw);
}

// One stage of a chained procedure: its parallel section and critical work.
struct ChainStage {
  double parallel_work = 0.0;
  double critical_work = 0.0;
};

struct RetryLoopChain {
  PlatformProfile profile;
  std::vector<ChainStage> stages;

  double retry_cost(std::size_t i) const {
    return profile.read_latency + stages[i].critical_work + profile.cas_latency;
  }

  void validate() const {
    profile.validate();
    if (stages.empty()) throw std::invalid_argument("chain needs at least one stage");
    for (const auto& s : stages) {
      if (!(s.parallel_work >= 0.0) || !(s.critical_work >= 0.0)) {
        throw std::invalid_argument("chain work values must be >= 0");
      }
    }
  }
};

struct ReducedChain {
  WorkloadSpec workload;  // pw' and cw of the longest stage
  std::size_t rotation = 0;
};

// Core of the multi-loop reduction, usable with double or Rat work values.
// Rotates so the stage with the largest retry cost (lowest index on ties)
// comes first, then folds every other stage into the parallel section:
// pw' = pw_1 + sum_{i>=2} (pw_i + rlw_i), rlw' = rlw_1.
template <typename T>
struct ReducedStages {
  T parallel_work;
  T retry_cost;
  std::size_t rotation;
};

template <typename T>
ReducedStages<T> reduce_stage_list(const std::vector<std::pair<T, T>>& stages) {
  if (stages.empty()) throw std::invalid_argument("chain needs at least one stage");
  std::size_t first = 0;
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (stages[i].second > stages[first].second) first = i;
  }
  T pw = stages[first].first;
  for (std::size_t k = 1; k < stages.size(); ++k) {
    const auto& s = stages[(first + k) % stages.size()];
    pw = pw + s.first + s.second;
  }
  return ReducedStages<T>{pw, stages[first].second, first};
}

inline ReducedChain reduce_chain(const RetryLoopChain& chain) {
  chain.validate();
  std::vector<std::pair<double, double>> stages;
  stages.reserve(chain.stages.size());
  for (std::size_t i = 0; i < chain.stages.size(); ++i) {
    stages.emplace_back(chain.stages[i].parallel_work, chain.retry_cost(i));
  }
  const auto reduced = reduce_stage_list(stages);
  WorkloadSpec out;
  out.parallel_work = reduced.parallel_work;
  out.critical_work = chain.stages[reduced.rotation].critical_work;
  return ReducedChain{out, reduced.rotation};
}

}  // namespace retrylab
