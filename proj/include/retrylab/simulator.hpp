// Deterministic discrete-event simulator for retry-loop procedures.
//
// Logical mode runs the abstract timing model: unit-length retries, a
// parallel section of q+r retry units, and the rule that an attempt reading
// at t and committing at t+1 fails iff another thread's successful CAS
// commits strictly inside (t, t+1). All logical timestamps are exact: inputs
// are rationals, internally mapped onto a common-denominator integer tick
// lattice so comparisons are integer comparisons.
//
// Hardware mode runs in integer cycles and models one contended cache line:
// an executing CAS holds the line exclusively, concurrent CAS requests queue
// FIFO by arrival (ties by thread index), and the Read opening a retry loop
// stalls while the line is held. Reads issued right after a failed CAS are
// not stalled; the thread still owns the data.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "retrylab/model.hpp"
#include "retrylab/rational.hpp"

namespace retrylab::sim {

// ---------------------------------------------------------------------------
// Shared trace pieces

struct Attempt {
  int thread = 0;
  long long start = 0;  // read / retry entry
  long long end = 0;    // CAS commit (logical) or retire (hardware)
  bool success = false;
  long long stall = 0;  // hardware only: duration beyond rc+cw+cc
};

struct SuccessRecord {
  int thread = 0;
  long long start = 0;       // start of the successful retry
  long fails_before = 0;     // consecutive fails preceding this success
};

struct SteadyState {
  bool detected = false;
  long fails = 0;                 // f
  long long period_ticks = 0;
  long long tick_den = 1;
  std::array<long long, 7> fail_histogram{};  // 0..5 and 6+ pooled
  std::size_t steady_begin = 0;   // success index where periodicity starts

  Rat period() const { return Rat(period_ticks, tick_den); }
  Rat throughput(int threads) const { return Rat(threads) / period(); }
  Rat occupancy(int threads) const {
    return Rat(threads) * Rat(fails + 1) / period();
  }
};

namespace detail {

// Smallest suffix of the success sequence in which three consecutive windows
// of P successes agree in thread order and inter-success gaps, every window
// covers all P threads, and per-thread fail counts match.
inline SteadyState detect_periodicity(const std::vector<SuccessRecord>& successes, int threads,
                                      long long tick_den) {
  SteadyState out;
  out.tick_den = tick_den;
  for (const auto& s : successes) {
    out.fail_histogram[static_cast<std::size_t>(std::min(s.fails_before, 6L))]++;
  }
  const std::size_t p = static_cast<std::size_t>(threads);
  if (successes.size() < 3 * p + 1) return out;

  std::vector<char> seen(p);
  for (std::size_t j = 0; j + 3 * p + 1 <= successes.size(); ++j) {
    bool ok = true;
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t i = 0; i < p && ok; ++i) {
      const auto& a = successes[j + i];
      const auto& b = successes[j + p + i];
      const auto& c = successes[j + 2 * p + i];
      if (a.thread != b.thread || b.thread != c.thread) ok = false;
      if (seen[static_cast<std::size_t>(a.thread) % p]++) ok = false;
      const long long gap1 = successes[j + i + 1].start - a.start;
      const long long gap2 = successes[j + p + i + 1].start - b.start;
      const long long gap3 = successes[j + 2 * p + i + 1].start - c.start;
      if (gap1 != gap2 || gap2 != gap3) ok = false;
    }
    if (!ok) continue;
    const long fails = successes[j + p].fails_before;
    for (std::size_t m = j + p; m < j + 3 * p && ok; ++m) {
      if (successes[m].fails_before != fails) ok = false;
    }
    if (!ok) continue;
    out.detected = true;
    out.fails = fails;
    out.period_ticks = successes[j + p].start - successes[j].start;
    out.steady_begin = j;
    return out;
  }
  return out;
}

inline long long checked_mul(long long a, long long b, const char* what) {
  const __int128 prod = static_cast<__int128>(a) * b;
  if (prod > std::numeric_limits<long long>::max() ||
      prod < std::numeric_limits<long long>::min()) {
    throw std::overflow_error(std::string("tick overflow in ") + what);
  }
  return static_cast<long long>(prod);
}

// Common denominator for a set of rationals, as ticks per retry unit.
inline long long common_denominator(const std::vector<Rat>& values) {
  BigInt den = 1;
  for (const auto& v : values) {
    den = boost::multiprecision::lcm(den, rat_den(v));
  }
  return to_ll(den);
}

inline long long to_ticks(const Rat& v, long long den, const char* what) {
  const BigInt scaled = rat_num(v) * (BigInt(den) / rat_den(v));
  if (scaled > std::numeric_limits<long long>::max() ||
      scaled < std::numeric_limits<long long>::min()) {
    throw std::overflow_error(std::string("tick overflow in ") + what);
  }
  return scaled.convert_to<long long>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Logical mode

struct LogicalConfig {
  int threads = 1;
  long whole = 0;   // q
  Rat fraction;     // r
  std::vector<Rat> offsets;  // first attempt per thread; empty -> i/(64P)
  Rat horizon = Rat(200);    // retry units

  std::vector<Rat> effective_offsets() const {
    if (!offsets.empty()) {
      if (offsets.size() != static_cast<std::size_t>(threads)) {
        throw std::invalid_argument("need one offset per thread");
      }
      return offsets;
    }
    std::vector<Rat> out(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) {
      out[static_cast<std::size_t>(i)] = Rat(i, 64LL * threads);
    }
    return out;
  }

  void validate() const {
    if (threads < 1) throw std::invalid_argument("need at least one thread");
    if (whole < 0) throw std::invalid_argument("q must be >= 0");
    if (fraction < 0 || fraction >= 1) throw std::invalid_argument("r must be in [0,1)");
    if (!(horizon > 0)) throw std::invalid_argument("horizon must be > 0");
  }
};

struct LogicalTrace {
  int threads = 1;
  long whole = 0;
  Rat fraction;
  long long tick_den = 1;  // ticks per retry unit
  bool r_zero_warning = false;
  std::vector<Attempt> attempts;      // commit order
  std::vector<SuccessRecord> successes;

  Rat at(long long ticks) const { return Rat(ticks, tick_den); }
};

inline LogicalTrace run_logical(const LogicalConfig& config) {
  config.validate();
  const auto offsets = config.effective_offsets();

  std::vector<Rat> lattice{config.fraction, config.horizon};
  lattice.insert(lattice.end(), offsets.begin(), offsets.end());
  const long long den = detail::common_denominator(lattice);
  const long long unit = den;
  const long long parallel =
      detail::checked_mul(config.whole, den, "parallel section") +
      detail::to_ticks(config.fraction, den, "parallel section");
  const long long horizon = detail::to_ticks(config.horizon, den, "horizon");

  LogicalTrace trace;
  trace.threads = config.threads;
  trace.whole = config.whole;
  trace.fraction = config.fraction;
  trace.tick_den = den;
  trace.r_zero_warning = (config.fraction == 0);

  const std::size_t p = static_cast<std::size_t>(config.threads);
  std::vector<long long> next_start(p);
  std::vector<long> consec_fails(p, 0);
  for (std::size_t i = 0; i < p; ++i) {
    next_start[i] = detail::to_ticks(offsets[i], den, "offset");
  }

  long long last_success_commit = std::numeric_limits<long long>::min();
  while (true) {
    std::size_t who = 0;
    for (std::size_t i = 1; i < p; ++i) {
      if (next_start[i] < next_start[who]) who = i;
    }
    const long long start = next_start[who];
    const long long commit = start + unit;
    if (commit > horizon) break;

    // Fails iff a success committed strictly inside (start, commit). Commits
    // at the same instant are resolved in thread-index order, so the winner
    // is already recorded when the loser is processed.
    const bool success = last_success_commit <= start;
    trace.attempts.push_back({static_cast<int>(who), start, commit, success, 0});
    if (success) {
      last_success_commit = commit;
      trace.successes.push_back({static_cast<int>(who), start, consec_fails[who]});
      consec_fails[who] = 0;
      next_start[who] = commit + parallel;
    } else {
      ++consec_fails[who];
      next_start[who] = commit;
    }
  }
  if (trace.successes.empty()) {
    throw std::runtime_error("horizon exhausted before any success");
  }
  return trace;
}

inline SteadyState detect_steady_state(const LogicalTrace& trace) {
  return detail::detect_periodicity(trace.successes, trace.threads, trace.tick_den);
}

// Runs the base configuration to its cyclic regime, then re-runs with one
// extra thread whose first attempt lands `offset` after a steady reference
// point. Returns both regimes plus what happened to the newcomer.
struct InjectionOutcome {
  SteadyState base;
  SteadyState after;
  Rat inject_time;
  std::optional<Rat> injected_first_success;
  LogicalTrace trace;
};

inline InjectionOutcome inject_thread(const LogicalConfig& base, const Rat& offset,
                                      int settle_periods = 24) {
  LogicalTrace base_trace = run_logical(base);
  const SteadyState base_steady = detect_steady_state(base_trace);
  if (!base_steady.detected) {
    throw std::runtime_error("base configuration did not reach a cyclic execution");
  }
  const Rat period = base_steady.period();
  const Rat t_ref = base_trace.at(base_trace.successes[base_steady.steady_begin].start) +
                    Rat(3) * period;
  const Rat t_inject = t_ref + offset;

  LogicalConfig extended = base;
  extended.offsets = base.effective_offsets();
  extended.offsets.push_back(t_inject);
  extended.threads = base.threads + 1;
  extended.horizon = t_inject + Rat(settle_periods) * period;

  InjectionOutcome out{base_steady, SteadyState{}, t_inject, std::nullopt,
                       run_logical(extended)};
  out.after = detect_steady_state(out.trace);
  for (const auto& s : out.trace.successes) {
    if (s.thread == base.threads) {
      out.injected_first_success = out.trace.at(s.start);
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Several retry loops (logical mode)

struct LogicalChainStage {
  Rat parallel_work;  // pw_i, in time units
  Rat retry_cost;     // rlw_i
};

struct MultiLoopConfig {
  int threads = 1;
  std::vector<LogicalChainStage> stages;
  std::vector<Rat> offsets;  // first attempt of the longest stage; empty -> i*rlw/(64P)
  Rat horizon = Rat(2000);

  void validate() const {
    if (threads < 1) throw std::invalid_argument("need at least one thread");
    if (stages.empty()) throw std::invalid_argument("chain needs at least one stage");
    for (const auto& s : stages) {
      if (s.parallel_work < 0 || !(s.retry_cost > 0)) {
        throw std::invalid_argument("stage work must be >= 0 and retry cost > 0");
      }
    }
    if (!(horizon > 0)) throw std::invalid_argument("horizon must be > 0");
  }
};

struct MultiLoopTrace {
  int threads = 1;
  long long tick_den = 1;
  std::size_t rotation = 0;              // applied cyclic shift (longest first)
  std::vector<long long> fails_per_stage;  // original stage indexing
  std::vector<SuccessRecord> longest_stage_successes;
  long long completions = 0;             // full-sequence completions
  std::vector<Attempt> attempts;         // commit order, stage encoded nowhere

  Rat at(long long ticks) const { return Rat(ticks, tick_den); }
};

inline MultiLoopTrace run_multi_loop(const MultiLoopConfig& config) {
  config.validate();
  const std::size_t stage_count = config.stages.size();

  // Renumber so the stage with the largest retry cost (lowest index on ties)
  // runs first; earlier stages of the round are absorbed into initialization.
  std::size_t rot = 0;
  for (std::size_t i = 1; i < stage_count; ++i) {
    if (config.stages[i].retry_cost > config.stages[rot].retry_cost) rot = i;
  }
  std::vector<LogicalChainStage> stages(stage_count);
  for (std::size_t i = 0; i < stage_count; ++i) {
    stages[i] = config.stages[(rot + i) % stage_count];
  }

  std::vector<Rat> offsets = config.offsets;
  if (offsets.empty()) {
    offsets.resize(static_cast<std::size_t>(config.threads));
    for (int i = 0; i < config.threads; ++i) {
      offsets[static_cast<std::size_t>(i)] =
          Rat(i) * stages[0].retry_cost / Rat(64LL * config.threads);
    }
  } else if (offsets.size() != static_cast<std::size_t>(config.threads)) {
    throw std::invalid_argument("need one offset per thread");
  }

  std::vector<Rat> lattice{config.horizon};
  for (const auto& s : stages) {
    lattice.push_back(s.parallel_work);
    lattice.push_back(s.retry_cost);
  }
  lattice.insert(lattice.end(), offsets.begin(), offsets.end());
  const long long den = detail::common_denominator(lattice);

  std::vector<long long> stage_retry(stage_count);
  std::vector<long long> stage_parallel(stage_count);
  for (std::size_t i = 0; i < stage_count; ++i) {
    stage_retry[i] = detail::to_ticks(stages[i].retry_cost, den, "retry cost");
    stage_parallel[i] = detail::to_ticks(stages[i].parallel_work, den, "parallel work");
  }
  const long long horizon = detail::to_ticks(config.horizon, den, "horizon");

  MultiLoopTrace trace;
  trace.threads = config.threads;
  trace.tick_den = den;
  trace.rotation = rot;
  trace.fails_per_stage.assign(stage_count, 0);

  const std::size_t p = static_cast<std::size_t>(config.threads);
  std::vector<long long> next_start(p);
  std::vector<std::size_t> stage_of(p, 0);
  std::vector<long> consec_fails(p, 0);
  for (std::size_t i = 0; i < p; ++i) {
    next_start[i] = detail::to_ticks(offsets[i], den, "offset");
  }
  std::vector<long long> last_commit(stage_count, std::numeric_limits<long long>::min());

  while (true) {
    std::size_t who = 0;
    long long best_commit = std::numeric_limits<long long>::max();
    for (std::size_t i = 0; i < p; ++i) {
      const long long commit = next_start[i] + stage_retry[stage_of[i]];
      if (commit < best_commit) {
        best_commit = commit;
        who = i;
      }
    }
    if (best_commit > horizon) break;
    const std::size_t stage = stage_of[who];
    const long long start = next_start[who];
    const bool success = last_commit[stage] <= start;
    trace.attempts.push_back({static_cast<int>(who), start, best_commit, success, 0});
    if (success) {
      last_commit[stage] = best_commit;
      if (stage == 0) {
        trace.longest_stage_successes.push_back(
            {static_cast<int>(who), start, consec_fails[who]});
        consec_fails[who] = 0;
      }
      if (stage == stage_count - 1) ++trace.completions;
      const std::size_t next = (stage + 1) % stage_count;
      stage_of[who] = next;
      next_start[who] = best_commit + stage_parallel[next];
    } else {
      trace.fails_per_stage[(stage + rot) % stage_count] += 1;
      if (stage == 0) ++consec_fails[who];
      next_start[who] = best_commit;
    }
  }
  if (trace.longest_stage_successes.empty()) {
    throw std::runtime_error("horizon exhausted before any success");
  }
  return trace;
}

inline SteadyState detect_steady_state(const MultiLoopTrace& trace) {
  return detail::detect_periodicity(trace.longest_stage_successes, trace.threads,
                                    trace.tick_den);
}

// ---------------------------------------------------------------------------
// Hardware mode

enum class PwSampler { kConstant, kPoisson };

struct HardwareConfig {
  PlatformProfile profile;
  long long parallel_work = 0;  // cycles; mean when sampler is Poisson
  long long critical_work = 0;
  PwSampler sampler = PwSampler::kConstant;
  std::uint64_t rng_seed = 1;
  long long horizon = 1'000'000;  // cycles
  std::vector<long long> offsets;  // first read per thread; empty -> spread

  void validate() const {
    profile.validate();
    if (parallel_work < 0 || critical_work < 0) {
      throw std::invalid_argument("work must be >= 0");
    }
    if (horizon <= 0) throw std::invalid_argument("horizon must be > 0");
  }
};

struct HardwareTrace {
  int threads = 1;
  long long read_latency = 0;
  long long cas_latency = 0;
  long long critical_work = 0;
  PwSampler sampler = PwSampler::kConstant;
  std::uint64_t rng_seed = 1;
  long long horizon = 0;
  std::vector<Attempt> attempts;  // end = CAS retire
  std::vector<SuccessRecord> successes;
};

inline HardwareTrace run_hardware(const HardwareConfig& config) {
  config.validate();
  const long long rc = std::llround(config.profile.read_latency);
  const long long cc = std::llround(config.profile.cas_latency);
  const long long cw = config.critical_work;
  if (rc < 1) throw std::invalid_argument("read latency must round to >= 1 cycle");
  const std::size_t p = static_cast<std::size_t>(config.profile.threads);

  HardwareTrace trace;
  trace.threads = config.profile.threads;
  trace.read_latency = rc;
  trace.cas_latency = cc;
  trace.critical_work = cw;
  trace.sampler = config.sampler;
  trace.rng_seed = config.rng_seed;
  trace.horizon = config.horizon;

  std::vector<std::mt19937_64> rng;
  rng.reserve(p);
  for (std::size_t i = 0; i < p; ++i) {
    rng.emplace_back(config.rng_seed + 0x9e3779b97f4a7c15ULL * (i + 1));
  }
  std::poisson_distribution<long long> poisson(
      std::max<double>(1.0, static_cast<double>(config.parallel_work)));
  const auto sample_pw = [&](std::size_t i) -> long long {
    if (config.sampler == PwSampler::kConstant || config.parallel_work == 0) {
      return config.parallel_work;
    }
    return poisson(rng[i]);
  };

  // Per-thread state machine; each thread owns exactly one pending event and
  // events are processed chronologically (ties by thread index), so the line
  // schedule only ever reflects requests that have already arrived. The value
  // a read observes is the version at the instant it acquires the line; this
  // keeps successful commits at least rc+cw+cc apart, the system-wise bound.
  enum class Phase { kReadStart, kDataArrive, kCasArrive, kCasGrant };
  struct ThreadState {
    Phase phase = Phase::kReadStart;
    long long when = 0;
    bool expandable = true;  // only the read opening a retry loop stalls
    long long retry_start = 0;
    std::uint64_t version_seen = 0;
    long consec_fails = 0;
  };
  // Default spawn times one uncontended retry apart: the cyclic-execution
  // argument assumes initialization is spaced enough, and a clustered start
  // would pin the run to the largest expansion fixed point instead of the
  // smallest one the estimate reports.
  std::vector<ThreadState> threads(p);
  for (std::size_t i = 0; i < p; ++i) {
    threads[i].when = config.offsets.empty()
                          ? static_cast<long long>(i) * (rc + cw + cc)
                          : config.offsets[i];
  }

  std::uint64_t version = 0;
  long long line_free = std::numeric_limits<long long>::min();

  // Exclusive-hold windows of granted CASes. A read only waits for the hold
  // covering its start (the line is forwarded between requests), never for
  // the whole queue.
  std::vector<std::pair<long long, long long>> holds;
  const auto covering_hold_end = [&](long long t) -> long long {
    long long end = t;
    std::size_t keep = 0;
    for (std::size_t i = 0; i < holds.size(); ++i) {
      if (holds[i].second <= t) continue;  // expired
      holds[keep++] = holds[i];
      if (holds[i].first <= t) end = holds[i].second;
    }
    holds.resize(keep);
    return end;
  };

  // Events at the same cycle resolve in a fixed phase order (reads sample
  // before same-instant commits land), then by thread index; this keeps the
  // machine deterministic and successful commits rc+cw+cc apart.
  const auto rank = [](Phase ph) {
    switch (ph) {
      case Phase::kDataArrive: return 0;
      case Phase::kCasGrant: return 1;
      case Phase::kCasArrive: return 2;
      case Phase::kReadStart: return 3;
    }
    return 3;
  };
  while (true) {
    std::size_t who = 0;
    long long best = std::numeric_limits<long long>::max();
    int best_rank = 4;
    for (std::size_t i = 0; i < p; ++i) {
      const int r = rank(threads[i].phase);
      if (threads[i].when < best || (threads[i].when == best && r < best_rank)) {
        best = threads[i].when;
        best_rank = r;
        who = i;
      }
    }
    if (best > config.horizon) break;
    ThreadState& st = threads[who];

    switch (st.phase) {
      case Phase::kReadStart: {
        const long long t = st.when;
        st.retry_start = t;
        // Stalled while a CAS that started earlier holds the line; a read
        // issued right after this thread's own failed CAS goes straight out,
        // the thread still holds the data.
        st.when = st.expandable ? covering_hold_end(t) : t;
        st.phase = Phase::kDataArrive;
        break;
      }
      case Phase::kDataArrive: {
        // A loop-opening read observes the version as the line is acquired.
        // A retry after a failure keeps what its failed CAS returned: nothing
        // can have committed while that CAS held the line.
        if (st.expandable) st.version_seen = version;
        st.when = st.when + rc + cw;
        st.phase = Phase::kCasArrive;
        break;
      }
      case Phase::kCasArrive: {
        const long long grant = std::max(st.when, line_free);
        line_free = grant + cc;
        holds.emplace_back(grant, grant + cc);
        st.when = grant;
        st.phase = Phase::kCasGrant;
        break;
      }
      case Phase::kCasGrant: {
        const long long retire = st.when + cc;
        const bool success = (st.version_seen == version);
        if (success) ++version;
        trace.attempts.push_back({static_cast<int>(who), st.retry_start, retire, success,
                                  (retire - st.retry_start) - (rc + cw + cc)});
        if (success) {
          trace.successes.push_back({static_cast<int>(who), st.retry_start, st.consec_fails});
          st.consec_fails = 0;
          st.expandable = true;
          st.when = retire + sample_pw(who);
        } else {
          ++st.consec_fails;
          st.expandable = false;
          st.version_seen = version;  // the value this failed CAS witnessed
          st.when = retire;
        }
        st.phase = Phase::kReadStart;
        break;
      }
    }
  }
  if (trace.successes.empty()) {
    throw std::runtime_error("horizon exhausted before any success");
  }
  return trace;
}

inline SteadyState detect_steady_state(const HardwareTrace& trace) {
  return detail::detect_periodicity(trace.successes, trace.threads, 1);
}

// Windowed measurements over a hardware trace.
struct HardwareStats {
  double throughput = 0.0;       // successes per cycle
  double occupancy = 0.0;        // average threads inside the retry loop
  double avg_stall = 0.0;        // cycles beyond rc+cw+cc, per retry
  double fails_per_success = 0.0;
};

inline HardwareStats measure_window(const HardwareTrace& trace, long long from, long long to) {
  if (to <= from) throw std::invalid_argument("empty measurement window");
  HardwareStats stats;
  long long successes = 0;
  long long fails = 0;
  long long busy = 0;
  long long stall_sum = 0;
  long long retries = 0;
  for (const auto& a : trace.attempts) {
    const long long lo = std::max(a.start, from);
    const long long hi = std::min(a.end, to);
    if (hi > lo) busy += hi - lo;
    if (a.start >= from && a.end <= to) {
      ++retries;
      stall_sum += a.stall;
      if (a.success) ++successes;
      else ++fails;
    }
  }
  const double span = static_cast<double>(to - from);
  stats.throughput = static_cast<double>(successes) / span;
  stats.occupancy = static_cast<double>(busy) / span;
  if (retries > 0) stats.avg_stall = static_cast<double>(stall_sum) / static_cast<double>(retries);
  if (successes > 0) stats.fails_per_success = static_cast<double>(fails) / static_cast<double>(successes);
  return stats;
}

// ---------------------------------------------------------------------------
// Trace export

inline void export_csv(const LogicalTrace& trace, std::ostream& os) {
  os << "thread,event,time_num,time_den\n";
  const auto row = [&](int thread, const char* event, long long ticks) {
    const Rat t(ticks, trace.tick_den);
    os << thread << ',' << event << ',' << rat_num(t) << ',' << rat_den(t) << '\n';
  };
  for (const auto& a : trace.attempts) {
    row(a.thread, "retry_start", a.start);
    row(a.thread, a.success ? "cas_commit_success" : "cas_fail", a.end);
    if (a.success) row(a.thread, "parallel_start", a.end);
  }
}

inline void export_csv(const HardwareTrace& trace, std::ostream& os) {
  os << "thread,event,cycle\n";
  os << "# sampler=" << (trace.sampler == PwSampler::kPoisson ? "poisson" : "constant")
     << " seed=" << trace.rng_seed << '\n';
  for (const auto& a : trace.attempts) {
    os << a.thread << ",retry_start," << a.start << '\n';
    os << a.thread << (a.success ? ",cas_commit_success," : ",cas_fail,") << a.end << '\n';
    if (a.success) os << a.thread << ",parallel_start," << a.end << '\n';
  }
}

}  // namespace retrylab::sim
