// Hardware measurement harness: latency calibration with a two-thread cache
// line bounce, pinned Procedure-style workers over the instrumented
// structures, back-off strategies, and model-vs-measurement CSV rows.
#pragma once

#include <atomic>
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif
#if defined(__x86_64__) || defined(__i386__)
#include <x86intrin.h>
#endif

#include "retrylab/estimator.hpp"
#include "retrylab/model.hpp"
#include "retrylab/structures.hpp"

#ifndef RETRYLAB_BUILD_ID
#define RETRYLAB_BUILD_ID "dev"
#endif

namespace retrylab::bench {

// Raised when the machine cannot run hardware measurements (no pinning, no
// cycle counter). The CLI maps it to its hardware-unavailable exit code.
struct HardwareUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool pin_to_core(unsigned core) {
#if defined(__linux__)
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(core, &set);
  return pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0;
#else
  (void)core;
  return false;
#endif
}

// Core list from RETRYLAB_CPUSET ("0,2,4"), defaulting to 0..n-1.
inline std::vector<unsigned> cpu_set(std::size_t wanted) {
  std::vector<unsigned> cores;
  if (const char* env = std::getenv("RETRYLAB_CPUSET")) {
    std::stringstream ss(env);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) cores.push_back(static_cast<unsigned>(std::stoul(tok)));
    }
  }
  for (unsigned c = 0; cores.size() < wanted; ++c) {
    if (std::find(cores.begin(), cores.end(), c) == cores.end()) cores.push_back(c);
  }
  return cores;
}

inline bool has_cycle_counter() {
#if defined(__x86_64__) || defined(__i386__)
  return true;
#else
  return false;
#endif
}

inline std::uint64_t read_cycles() {
#if defined(__x86_64__) || defined(__i386__)
  unsigned aux;
  return __rdtscp(&aux);
#else
  return static_cast<std::uint64_t>(
      std::chrono::steady_clock::now().time_since_epoch().count());
#endif
}

inline void cpu_pause() {
#if defined(__x86_64__) || defined(__i386__)
  _mm_pause();
#else
  std::atomic_signal_fence(std::memory_order_seq_cst);
#endif
}

inline void pause_spin(std::uint64_t iterations) {
  for (std::uint64_t i = 0; i < iterations; ++i) cpu_pause();
}

// Wait loop for handshakes. Yields now and then so an oversubscribed box
// (fewer free cores than spinners) still makes progress.
template <typename Pred>
void spin_until(Pred&& done) {
  for (unsigned i = 0; !done(); ++i) {
    if ((i & 0x3f) == 0x3f) std::this_thread::yield();
    else cpu_pause();
  }
}

// Cycles consumed by one pause-loop iteration, measured once per run.
inline double calibrate_pause_cost() {
  constexpr std::uint64_t kIters = 20000;
  double best = 1e18;
  for (int rep = 0; rep < 7; ++rep) {
    const std::uint64_t t0 = read_cycles();
    pause_spin(kIters);
    const std::uint64_t t1 = read_cycles();
    best = std::min(best, static_cast<double>(t1 - t0) / kIters);
  }
  return std::max(1.0, best);
}

// TSC ticks per millisecond, estimated against the wall clock.
inline double cycles_per_ms() {
  const auto w0 = std::chrono::steady_clock::now();
  const std::uint64_t c0 = read_cycles();
  while (std::chrono::steady_clock::now() - w0 < std::chrono::milliseconds(20)) cpu_pause();
  const std::uint64_t c1 = read_cycles();
  const auto w1 = std::chrono::steady_clock::now();
  const double ms = std::chrono::duration<double, std::milli>(w1 - w0).count();
  return static_cast<double>(c1 - c0) / ms;
}

struct CalibrationResult {
  PlatformProfile profile;       // medians, threads = available cores
  double read_iqr = 0.0;
  double cas_iqr = 0.0;
  double read_owned_median = 0.0;  // load on a line this core already owns
  bool timer_warning = false;      // suspect resolution (virtualized?)
  int rounds = 0;
};

namespace detail {

inline double median(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double iqr(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() * 3) / 4] - v[v.size() / 4];
}

}  // namespace detail

// Two pinned threads bounce one cache line to put it in the modeled states:
// the measurer reads a line the partner just invalidated (rc) and CASes a
// line the partner keeps stealing (cc).
inline CalibrationResult calibrate(int rounds) {
  if (rounds < 1) throw std::invalid_argument("calibration needs rounds >= 1");
  if (!has_cycle_counter()) throw HardwareUnavailable("no cycle counter on this platform");
  const auto cores = cpu_set(2);
  if (std::thread::hardware_concurrency() < 2) {
    throw HardwareUnavailable("calibration needs two cores");
  }

  struct alignas(lf::kCacheLine) SharedLine {
    std::atomic<std::uint64_t> value{0};
  };
  struct alignas(lf::kCacheLine) Flag {
    std::atomic<int> phase{0};
  };
  SharedLine line;
  Flag flag;
  std::atomic<bool> pin_ok{true};

  // timer overhead
  std::vector<double> overhead_samples;
  for (int i = 0; i < 1001; ++i) {
    const std::uint64_t t0 = read_cycles();
    const std::uint64_t t1 = read_cycles();
    overhead_samples.push_back(static_cast<double>(t1 - t0));
  }
  const double overhead = detail::median(overhead_samples);

  std::vector<double> rc_samples, cc_samples, owned_samples;
  rc_samples.reserve(rounds);
  cc_samples.reserve(rounds);
  owned_samples.reserve(rounds);

  // Phases 4r..4r+3 alternate strictly between the two threads; each side
  // only ever advances the phase the other is waiting on.
  std::thread partner([&] {
    if (!pin_to_core(cores[1])) pin_ok.store(false);
    for (int r = 0; r < rounds; ++r) {
      spin_until([&] { return flag.phase.load(std::memory_order_acquire) == 4 * r; });
      line.value.store(r + 1, std::memory_order_seq_cst);  // invalidate the measurer
      flag.phase.store(4 * r + 1, std::memory_order_release);
      spin_until([&] { return flag.phase.load(std::memory_order_acquire) == 4 * r + 2; });
      line.value.store(r + 100000, std::memory_order_seq_cst);
      flag.phase.store(4 * r + 3, std::memory_order_release);
    }
  });

  if (!pin_to_core(cores[0])) pin_ok.store(false);
  for (int r = 0; r < rounds; ++r) {
    spin_until([&] { return flag.phase.load(std::memory_order_acquire) == 4 * r + 1; });
    // Read on an invalid line.
    std::uint64_t t0 = read_cycles();
    volatile std::uint64_t got = line.value.load(std::memory_order_seq_cst);
    std::uint64_t t1 = read_cycles();
    rc_samples.push_back(std::max(1.0, static_cast<double>(t1 - t0) - overhead));
    // Read on a line we own.
    t0 = read_cycles();
    got = line.value.load(std::memory_order_seq_cst);
    t1 = read_cycles();
    owned_samples.push_back(std::max(0.5, static_cast<double>(t1 - t0) - overhead));
    (void)got;
    flag.phase.store(4 * r + 2, std::memory_order_release);
    spin_until([&] { return flag.phase.load(std::memory_order_acquire) == 4 * r + 3; });
    // CAS after the partner stole the line again.
    std::uint64_t expected = line.value.load(std::memory_order_relaxed);
    t0 = read_cycles();
    line.value.compare_exchange_strong(expected, expected + 1, std::memory_order_seq_cst);
    t1 = read_cycles();
    cc_samples.push_back(std::max(1.0, static_cast<double>(t1 - t0) - overhead));
    flag.phase.store(4 * r + 4, std::memory_order_release);
  }
  partner.join();
  if (!pin_ok.load()) throw HardwareUnavailable("thread pinning failed");

  CalibrationResult out;
  out.rounds = rounds;
  auto rc = rc_samples, cc = cc_samples, owned = owned_samples;
  out.profile.read_latency = detail::median(rc);
  out.profile.cas_latency = detail::median(cc);
  out.profile.threads = static_cast<int>(std::thread::hardware_concurrency());
  out.read_iqr = detail::iqr(rc_samples);
  out.cas_iqr = detail::iqr(cc_samples);
  out.read_owned_median = detail::median(owned);
  out.timer_warning = out.profile.read_latency < 4.0 || out.read_iqr > out.profile.read_latency;
  return out;
}

// ---------------------------------------------------------------------------
// Benchmark runs

enum class StructureKind { kCounter, kStack, kQueue };

struct BackoffPolicy {
  enum class Kind { kNone, kLinear, kExponential, kModel } kind = Kind::kNone;
  double parameter = 0.0;  // step (linear), base (exponential), pad (model)

  // Extra parallel-section cycles after an op that needed `fails` retries.
  double pad_for(long fails) const {
    switch (kind) {
      case Kind::kNone: return 0.0;
      case Kind::kLinear: return parameter * static_cast<double>(fails);
      case Kind::kExponential:
        return fails == 0 ? 0.0
                          : parameter * static_cast<double>((1ULL << std::min(fails, 16L)) - 1);
      case Kind::kModel: return parameter;  // constant pad up to the peak
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::kNone: return "none";
      case Kind::kLinear: return "linear(" + std::to_string(parameter) + ")";
      case Kind::kExponential: return "exponential(" + std::to_string(parameter) + ")";
      case Kind::kModel: return "model(" + std::to_string(parameter) + ")";
    }
    return "none";
  }
};

struct BenchOptions {
  int duration_ms = 200;
  int repetitions = 3;
  PwDistribution distribution = PwDistribution::kConstant;
  std::uint64_t seed = 1;
  std::size_t stack_stride_lines = 1;
  std::size_t pool_capacity = 1 << 16;
  std::size_t stack_pop_width = 1;  // k for pop_multi

  int effective_duration_ms() const {
    if (const char* env = std::getenv("RETRYLAB_DURATION_MS")) {
      const int v = std::atoi(env);
      if (v > 0) return v;
    }
    return duration_ms;
  }
};

struct BenchRow {
  double pw_cycles = 0.0;
  int threads = 0;
  std::string structure;
  std::string strategy;
  double thr_meas_per_ms = 0.0;
  double fails_per_success = 0.0;
  std::uint64_t fail_hist[7] = {0, 0, 0, 0, 0, 0, 0};
  double thr_low_model = 0.0;   // ops/ms
  double thr_high_model = 0.0;
  double thr_avg_model = 0.0;
  double rc = 0.0;
  double cc = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  double measured_ms = 0.0;  // actual wall window, not part of the CSV schema
  std::string error;  // recorded, row still emitted
};

inline const char* csv_header() {
  return "pw_cycles,threads,structure,strategy,thr_meas_per_ms,fails_per_success,"
         "f0,f1,f2,f3,f4,f5,f6plus,thr_low_model,thr_high_model,thr_avg_model,"
         "rc,cc,rep,seed";
}

inline void write_csv(std::ostream& os, const std::vector<BenchRow>& rows,
                      const PlatformProfile& profile, const std::string& note = "") {
  os << "# retrylab bench build=" << RETRYLAB_BUILD_ID << " rc=" << profile.read_latency
     << " cc=" << profile.cas_latency << " P=" << profile.threads;
  if (!note.empty()) os << ' ' << note;
  os << '\n' << csv_header() << '\n';
  for (const auto& r : rows) {
    os << r.pw_cycles << ',' << r.threads << ',' << r.structure << ',' << r.strategy << ','
       << r.thr_meas_per_ms << ',' << r.fails_per_success;
    for (const auto h : r.fail_hist) os << ',' << h;
    os << ',' << r.thr_low_model << ',' << r.thr_high_model << ',' << r.thr_avg_model << ','
       << r.rc << ',' << r.cc << ',' << r.rep << ',' << r.seed << '\n';
    if (!r.error.empty()) os << "# error pw=" << r.pw_cycles << " rep=" << r.rep << ": "
                             << r.error << '\n';
  }
}

inline const char* structure_name(StructureKind kind) {
  switch (kind) {
    case StructureKind::kCounter: return "counter";
    case StructureKind::kStack: return "stack";
    case StructureKind::kQueue: return "queue";
  }
  return "counter";
}

namespace detail {

struct WorkerResult {
  std::uint64_t successes = 0;
  std::uint64_t fails = 0;
  std::uint64_t fail_hist[7] = {0, 0, 0, 0, 0, 0, 0};
  bool pin_failed = false;
};

// One Procedure-style worker: parallel section as a pause loop, then one
// structure operation, repeated until the stop flag.
template <typename Op>
WorkerResult run_worker(int tid, unsigned core, double pw_cycles, double pause_cost,
                        PwDistribution dist, std::uint64_t seed,
                        std::poisson_distribution<long long> poisson,
                        const BackoffPolicy& policy, std::atomic<bool>& stop,
                        std::atomic<int>& ready, std::atomic<bool>& go, Op&& op) {
  WorkerResult res;
  if (!pin_to_core(core)) res.pin_failed = true;
  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(tid) * 0x9e3779b97f4a7c15ULL);
  double pad = 0.0;
  ready.fetch_add(1);
  spin_until([&] { return go.load(std::memory_order_acquire); });

  while (!stop.load(std::memory_order_relaxed)) {
    double pw = pw_cycles;
    if (dist == PwDistribution::kPoissonMean && pw_cycles > 0) {
      pw = static_cast<double>(poisson(rng));
    }
    pause_spin(static_cast<std::uint64_t>((pw + pad) / pause_cost));
    const long fails = op(tid);
    if (fails < 0) continue;  // op hit a pool limit; ignore this round
    ++res.successes;
    res.fails += static_cast<std::uint64_t>(fails);
    res.fail_hist[std::min<long>(fails, 6)]++;
    pad = policy.pad_for(fails);
  }
  return res;
}

}  // namespace detail

// Runs P pinned workers per grid point and emits one row per repetition.
// Model columns come from the estimator at the same pw.
inline std::vector<BenchRow> run_bench(StructureKind kind, const PlatformProfile& profile,
                                       const std::vector<double>& pw_grid, int threads,
                                       BackoffPolicy policy, const BenchOptions& options,
                                       double critical_work_hint = 0.0) {
  profile.validate();
  if (threads < 1) throw std::invalid_argument("need at least one worker");
  if (pw_grid.empty()) throw std::invalid_argument("empty pw grid");
  const auto cores = cpu_set(static_cast<std::size_t>(threads));
  const double pause_cost = calibrate_pause_cost();
  const double cpm = cycles_per_ms();
  const int duration = options.effective_duration_ms();

  std::vector<BenchRow> rows;
  for (const double pw : pw_grid) {
    WorkloadSpec workload{pw, critical_work_hint, options.distribution};
    ThroughputEstimate model = estimate(profile, workload);
    BackoffPolicy point_policy = policy;
    if (policy.kind == BackoffPolicy::Kind::kModel) {
      // pad the parallel section up to the model's peak
      std::vector<double> grid;
      const double rlw = min_retry_cost(profile, workload);
      for (double x = 0.0; x <= 3.0 * profile.threads * rlw; x += rlw / 4.0) grid.push_back(x);
      const auto rec = recommend_backoff(profile, workload, grid);
      point_policy.parameter = rec.backoff_for(pw);
    }

    for (int rep = 0; rep < options.repetitions; ++rep) {
      BenchRow row;
      row.pw_cycles = pw;
      row.threads = threads;
      row.structure = structure_name(kind);
      row.strategy = point_policy.name();
      row.rc = profile.read_latency;
      row.cc = profile.cas_latency;
      row.rep = rep;
      row.seed = options.seed + static_cast<std::uint64_t>(rep);
      row.thr_low_model = model.converged ? model.thr_low * cpm : 0.0;
      row.thr_high_model = model.converged ? model.thr_high * cpm : 0.0;
      row.thr_avg_model = model.converged ? model.thr_avg * cpm : 0.0;

      lf::CasCounter counter(threads);
      lf::TreiberStack<std::uint64_t> stack(options.pool_capacity, threads,
                                            options.stack_stride_lines);
      lf::MsQueue<std::uint64_t> queue(options.pool_capacity, threads);
      if (kind == StructureKind::kStack) {
        // leave headroom for elements in flight between a pop and its pushes
        const std::size_t fill = options.pool_capacity -
                                 static_cast<std::size_t>(threads) * options.stack_pop_width -
                                 2;
        for (std::size_t i = 0; i < fill; ++i) stack.push(0, i);
      }
      if (kind == StructureKind::kQueue) {
        for (int i = 0; i < threads; ++i) queue.enqueue(0, static_cast<std::uint64_t>(i));
      }

      // each op returns its failed-CAS count: attempts minus successes across
      // the whole operation (pops plus the pushes that recycle the elements)
      const auto fails_of = [](const lf::Instrumentation& c, int tid, auto&& body) -> long {
        const auto a0 = c.attempts_of(tid);
        const auto s0 = c.successes_of(tid);
        if (!body()) return -1;
        return static_cast<long>((c.attempts_of(tid) - a0) - (c.successes_of(tid) - s0));
      };
      const auto op = [&](int tid) -> long {
        switch (kind) {
          case StructureKind::kCounter:
            return fails_of(counter.counters(), tid, [&] {
              counter.increment(tid);
              return true;
            });
          case StructureKind::kStack:
            return fails_of(stack.counters(), tid, [&] {
              auto got = stack.pop_multi(tid, options.stack_pop_width);
              if (!got) return false;
              for (const auto v : *got) stack.push(tid, v);
              return true;
            });
          case StructureKind::kQueue:
            return fails_of(queue.counters(), tid, [&] {
              auto got = queue.dequeue(tid);
              if (!got) return false;
              queue.enqueue(tid, *got);
              return true;
            });
        }
        return 0;
      };

      std::atomic<bool> stop{false};
      std::atomic<bool> go{false};
      std::atomic<int> ready{0};
      // built once here: concurrent construction would race in lgamma()
      std::poisson_distribution<long long> poisson(std::max(1.0, pw));
      std::vector<detail::WorkerResult> results(static_cast<std::size_t>(threads));
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(threads));
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          results[static_cast<std::size_t>(t)] = detail::run_worker(
              t, cores[static_cast<std::size_t>(t)], pw, pause_cost, options.distribution,
              row.seed, poisson, point_policy, stop, ready, go, op);
        });
      }
      spin_until([&] { return ready.load() >= threads; });
      const auto t0 = std::chrono::steady_clock::now();
      go.store(true, std::memory_order_release);
      std::this_thread::sleep_for(std::chrono::milliseconds(duration));
      stop.store(true, std::memory_order_relaxed);
      for (auto& th : pool) th.join();
      const double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();

      std::uint64_t successes = 0, fails = 0;
      bool pin_failed = false;
      for (int t = 0; t < threads; ++t) {
        const auto& r = results[static_cast<std::size_t>(t)];
        successes += r.successes;
        fails += r.fails;
        for (int b = 0; b < 7; ++b) row.fail_hist[b] += r.fail_hist[b];
        pin_failed = pin_failed || r.pin_failed;
      }
      row.measured_ms = ms;
      row.thr_meas_per_ms = static_cast<double>(successes) / ms;
      row.fails_per_success =
          successes ? static_cast<double>(fails) / static_cast<double>(successes) : 0.0;
      if (pin_failed) row.error = "thread pinning failed";
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace retrylab::bench
