// Cyclic-execution theory in normalized retry units: gaps, the well-formed
// seed test, failure and throughput bounds, and the bound-achieving seed
// construction. Everything is templated on the scalar so the estimator can
// run in double while the simulator checks stay exact.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "retrylab/rational.hpp"

namespace retrylab {

namespace detail {

template <typename T>
long ceil_to_long(const T& v) {
  if constexpr (std::is_same_v<T, Rat>) {
    return to_ll(rat_ceil(v));
  } else {
    return static_cast<long>(std::ceil(v));
  }
}

}  // namespace detail

// Start times of P consecutive successes together with the workload shape
// they were observed under.
template <typename T>
struct SeedConfiguration {
  int threads = 1;              // P
  long whole = 0;               // q
  T fraction{};                 // r
  std::vector<T> success_starts;

  void validate() const {
    if (threads < 1) throw std::invalid_argument("seed needs at least one thread");
    if (whole < 0) throw std::invalid_argument("q must be >= 0");
    if (fraction < T(0) || fraction >= T(1)) throw std::invalid_argument("r must be in [0,1)");
    if (success_starts.size() != static_cast<std::size_t>(threads)) {
      throw std::invalid_argument("seed must hold one start per thread");
    }
    for (std::size_t i = 1; i < success_starts.size(); ++i) {
      if (!(success_starts[i - 1] < success_starts[i])) {
        throw std::invalid_argument("success starts must be strictly increasing");
      }
    }
  }
};

template <typename T>
struct GapTable {
  long order = 0;
  std::vector<T> values;
};

// f(S) = max(0, ceil(s_{P-1} - s_0 - q - r)).
template <typename T>
long fails_before_success(const SeedConfiguration<T>& seed) {
  seed.validate();
  const T spread = seed.success_starts.back() - seed.success_starts.front() -
                   T(seed.whole) - seed.fraction;
  return std::max(0L, detail::ceil_to_long(spread));
}

namespace detail {

// First-order gaps: slack between consecutive successes minus one retry,
// with the wrap-around term closing the cycle through q + r + f.
template <typename T>
std::vector<T> first_order_gaps(const SeedConfiguration<T>& seed, long fails) {
  const int p = seed.threads;
  std::vector<T> g(static_cast<std::size_t>(p));
  for (int n = 1; n < p; ++n) {
    g[n] = seed.success_starts[n] - seed.success_starts[n - 1] - T(1);
  }
  g[0] = seed.success_starts[0] + T(seed.whole) + seed.fraction + T(fails) -
         seed.success_starts[p - 1];
  return g;
}

// Order-k gaps as sums of k consecutive first-order gaps (indices mod P).
// Orders beyond P-1 decompose into whole cycles plus a remainder.
template <typename T>
std::vector<T> gaps_any_order(const SeedConfiguration<T>& seed, long order, long fails) {
  const int p = seed.threads;
  std::vector<T> out(static_cast<std::size_t>(p));
  if (order == 0) return out;
  const std::vector<T> g1 = first_order_gaps(seed, fails);
  T cycle_sum{};
  for (const T& v : g1) cycle_sum = cycle_sum + v;
  const long cycles = order / p;
  const long rem = order % p;
  for (int n = 0; n < p; ++n) {
    T acc = cycle_sum * T(cycles);
    for (long j = n - rem + 1; j <= n; ++j) {
      acc = acc + g1[static_cast<std::size_t>(((j % p) + p) % p)];
    }
    out[n] = acc;
  }
  return out;
}

}  // namespace detail

template <typename T>
GapTable<T> gaps(const SeedConfiguration<T>& seed, long order) {
  seed.validate();
  if (order < 0 || order > seed.threads - 1) {
    throw std::invalid_argument("gap order must be in [0, P-1]");
  }
  const long fails = fails_before_success(seed);
  return GapTable<T>{order, detail::gaps_any_order(seed, order, fails)};
}

// Gap-criterion test. The order-f criterion assumes the seed could come from
// an execution at all, which pins every first-order gap at >= 0 (successive
// successes cannot overlap); the wrap gap is >= 0 by construction of f.
template <typename T>
bool is_well_formed_seed(const SeedConfiguration<T>& seed) {
  seed.validate();
  const long fails = fails_before_success(seed);
  const std::vector<T> g1 = detail::first_order_gaps(seed, fails);
  for (std::size_t n = 1; n < g1.size(); ++n) {
    if (g1[n] < T(0)) return false;
  }
  const std::vector<T> gf = detail::gaps_any_order(seed, fails, fails);
  for (const T& v : gf) {
    if (v < T(0) || v >= T(1)) return false;
  }
  return true;
}

struct FailureBounds {
  long min_fails = 0;
  long max_fails = 0;
};

// f is feasible only while f*(q+1+f-P+r) < P; the closed-form bound is the
// positive root of that quadratic. Computed by searching the integer
// condition directly so the bound stays exact in both arithmetic modes.
template <typename T>
FailureBounds failure_bounds(int threads, long whole, const T& fraction) {
  if (threads < 1) throw std::invalid_argument("P must be >= 1");
  if (whole < 0) throw std::invalid_argument("q must be >= 0");
  if (fraction < T(0) || fraction >= T(1)) throw std::invalid_argument("r must be in [0,1)");
  const long f_min = std::max(0L, static_cast<long>(threads) - 1 - whole);

  const auto feasible = [&](long f) {
    const T lhs = T(f) * (T(whole + 1 + f - threads) + fraction);
    return lhs < T(threads);
  };
  double rd;
  if constexpr (std::is_same_v<T, Rat>) {
    rd = rat_to_double(fraction);
  } else {
    rd = static_cast<double>(fraction);
  }
  const double a = static_cast<double>(threads) - 1.0 - static_cast<double>(whole) - rd;
  long f = static_cast<long>(std::floor((a + std::sqrt(a * a + 4.0 * threads)) / 2.0)) - 2;
  f = std::max(0L, f);
  while (f > 0 && !feasible(f)) --f;
  while (feasible(f + 1)) ++f;
  return FailureBounds{f_min, f};
}

template <typename T>
struct ThroughputOccupancy {
  T throughput{};  // successes per retry unit
  T occupancy{};   // average threads inside the retry loop
};

template <typename T>
ThroughputOccupancy<T> throughput_and_occupancy(int threads, long whole, const T& fraction,
                                                long fails) {
  if (fails < 0) throw std::invalid_argument("f must be >= 0");
  const T period = T(whole) + fraction + T(1) + T(fails);
  return ThroughputOccupancy<T>{T(threads) / period, T(threads) * T(fails + 1) / period};
}

// ceil(sqrt(P) - 1), computed on integers.
inline long max_wasted_retries(int threads) {
  if (threads < 1) throw std::invalid_argument("P must be >= 1");
  long s = static_cast<long>(std::sqrt(static_cast<double>(threads)));
  while (s * s > threads) --s;
  while ((s + 1) * (s + 1) <= threads) ++s;
  return (s * s == threads) ? s - 1 : s;
}

template <typename T>
long wasted_retries(int threads, long whole, const T& fraction) {
  const auto b = failure_bounds(threads, whole, fraction);
  return b.max_fails - b.min_fails;
}

// Equally spaced seed reaching the requested f: s_n = n*((q+1+f-P+r)/P + 1).
template <typename T>
SeedConfiguration<T> construct_seed(int threads, long whole, const T& fraction, long fails) {
  const auto bounds = failure_bounds(threads, whole, fraction);
  if (fails < bounds.min_fails || fails > bounds.max_fails) {
    throw std::invalid_argument("requested f outside [f_min, f_max]");
  }
  const T spacing =
      (T(whole + 1 + fails - threads) + fraction) / T(threads) + T(1);
  SeedConfiguration<T> seed;
  seed.threads = threads;
  seed.whole = whole;
  seed.fraction = fraction;
  seed.success_starts.resize(static_cast<std::size_t>(threads));
  for (int n = 0; n < threads; ++n) {
    seed.success_starts[n] = T(n) * spacing;
  }
  return seed;
}

}  // namespace retrylab
