// Instrumented lock-free structures used by the bench: a Treiber stack with
// multi-pop, a CAS counter, and a Michael-Scott queue with helping. Nodes
// come from pre-allocated pools addressed by index; links carry a version
// tag in the upper half to sidestep ABA when nodes are recycled. No memory
// is reclaimed to the system during a run.
#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <new>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace retrylab::lf {

inline constexpr std::uint32_t kNil = 0xffffffffu;
inline constexpr std::size_t kCacheLine = 64;

inline constexpr std::uint64_t pack_link(std::uint32_t idx, std::uint32_t tag) {
  return (static_cast<std::uint64_t>(tag) << 32) | idx;
}
inline constexpr std::uint32_t link_index(std::uint64_t link) {
  return static_cast<std::uint32_t>(link);
}
inline constexpr std::uint32_t link_tag(std::uint64_t link) {
  return static_cast<std::uint32_t>(link >> 32);
}

// Per-thread attempt/success counters, padded to their own lines and
// aggregated only at quiescence.
struct alignas(kCacheLine) OpCounters {
  std::atomic<std::uint64_t> attempts{0};
  std::atomic<std::uint64_t> successes{0};
};

class Instrumentation {
 public:
  explicit Instrumentation(int threads) : counters_(static_cast<std::size_t>(threads)) {}

  void attempt(int thread) {
    counters_[static_cast<std::size_t>(thread)].attempts.fetch_add(1, std::memory_order_relaxed);
  }
  void success(int thread) {
    counters_[static_cast<std::size_t>(thread)].successes.fetch_add(1, std::memory_order_relaxed);
  }
  std::uint64_t total_attempts() const {
    std::uint64_t n = 0;
    for (const auto& c : counters_) n += c.attempts.load(std::memory_order_relaxed);
    return n;
  }
  std::uint64_t total_successes() const {
    std::uint64_t n = 0;
    for (const auto& c : counters_) n += c.successes.load(std::memory_order_relaxed);
    return n;
  }
  std::uint64_t successes_of(int thread) const {
    return counters_[static_cast<std::size_t>(thread)].successes.load(std::memory_order_relaxed);
  }
  std::uint64_t attempts_of(int thread) const {
    return counters_[static_cast<std::size_t>(thread)].attempts.load(std::memory_order_relaxed);
  }

 private:
  std::vector<OpCounters> counters_;
};

namespace detail {

// Fixed pool of nodes placed `stride` cache lines apart. A stride above one
// defeats adjacent-line prefetch so that walking links costs a real miss.
template <typename Node>
class NodePool {
 public:
  NodePool(std::size_t capacity, std::size_t stride_lines)
      : capacity_(capacity), stride_bytes_(stride_lines * kCacheLine) {
    static_assert(std::is_trivially_destructible_v<Node>);
    if (capacity == 0) throw std::invalid_argument("pool capacity must be > 0");
    if (capacity >= kNil) throw std::invalid_argument("pool too large for 32-bit links");
    if (sizeof(Node) > stride_bytes_) throw std::invalid_argument("stride smaller than node");
    raw_ = static_cast<std::byte*>(::operator new[](capacity * stride_bytes_,
                                                    std::align_val_t(kCacheLine)));
    for (std::size_t i = 0; i < capacity; ++i) new (raw_ + i * stride_bytes_) Node();
  }
  ~NodePool() { ::operator delete[](raw_, std::align_val_t(kCacheLine)); }
  NodePool(const NodePool&) = delete;
  NodePool& operator=(const NodePool&) = delete;

  Node& operator[](std::uint32_t idx) {
    return *std::launder(reinterpret_cast<Node*>(raw_ + idx * stride_bytes_));
  }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t stride_bytes_;
  std::byte* raw_ = nullptr;
};

// Lock-free freelist over node indices (a Treiber stack of its own).
template <typename Node>
class FreeList {
 public:
  FreeList(NodePool<Node>& pool, std::uint32_t first, std::uint32_t count) : pool_(pool) {
    std::uint32_t head = kNil;
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t idx = first + count - 1 - i;
      pool_[idx].free_next.store(head, std::memory_order_relaxed);
      head = idx;
    }
    top_.store(pack_link(head, 0), std::memory_order_relaxed);
  }

  std::uint32_t acquire() {
    std::uint64_t top = top_.load(std::memory_order_acquire);
    while (link_index(top) != kNil) {
      const std::uint32_t idx = link_index(top);
      const std::uint32_t next = pool_[idx].free_next.load(std::memory_order_relaxed);
      if (top_.compare_exchange_weak(top, pack_link(next, link_tag(top) + 1),
                                     std::memory_order_acq_rel)) {
        return idx;
      }
    }
    return kNil;
  }

  void release(std::uint32_t idx) {
    std::uint64_t top = top_.load(std::memory_order_acquire);
    while (true) {
      pool_[idx].free_next.store(link_index(top), std::memory_order_relaxed);
      if (top_.compare_exchange_weak(top, pack_link(idx, link_tag(top) + 1),
                                     std::memory_order_acq_rel)) {
        return;
      }
    }
  }

 private:
  NodePool<Node>& pool_;
  alignas(kCacheLine) std::atomic<std::uint64_t> top_{pack_link(kNil, 0)};
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Treiber stack with multi-pop

template <typename T>
class TreiberStack {
  static_assert(std::is_trivially_copyable_v<T>);

  struct Node {
    std::atomic<T> value{};
    std::atomic<std::uint32_t> next{kNil};  // stable while the node is reachable
    std::atomic<std::uint32_t> free_next{kNil};
  };

 public:
  TreiberStack(std::size_t capacity, int threads, std::size_t stride_lines = 1)
      : pool_(capacity, stride_lines),
        free_(pool_, 0, static_cast<std::uint32_t>(capacity)),
        counters_(threads) {}

  bool push(int thread, const T& value) {
    const std::uint32_t idx = free_.acquire();
    if (idx == kNil) return false;
    pool_[idx].value.store(value, std::memory_order_relaxed);
    std::uint64_t top = top_.load(std::memory_order_acquire);
    while (true) {
      pool_[idx].next.store(link_index(top), std::memory_order_relaxed);
      counters_.attempt(thread);
      if (top_.compare_exchange_weak(top, pack_link(idx, link_tag(top) + 1),
                                     std::memory_order_acq_rel)) {
        counters_.success(thread);
        return true;
      }
    }
  }

  // Removes the top k elements with one CAS after walking k links (the walk
  // is the critical work). No partial pop: fewer than k elements on a stable
  // top reads as empty. A walk that hits the end on a top that has since
  // moved is stale and retries instead of reporting empty.
  std::optional<std::vector<T>> pop_multi(int thread, std::size_t k) {
    if (k < 1) throw std::invalid_argument("pop_multi needs k >= 1");
    std::uint64_t top = top_.load(std::memory_order_acquire);
    while (true) {
      std::uint32_t cursor = link_index(top);
      bool short_chain = false;
      for (std::size_t i = 0; i < k; ++i) {
        if (cursor == kNil) {
          short_chain = true;
          break;
        }
        cursor = pool_[cursor].next.load(std::memory_order_relaxed);
      }
      if (short_chain) {
        const std::uint64_t again = top_.load(std::memory_order_acquire);
        if (again == top) return std::nullopt;  // genuinely fewer than k
        top = again;
        continue;
      }
      counters_.attempt(thread);
      if (top_.compare_exchange_weak(top, pack_link(cursor, link_tag(top) + 1),
                                     std::memory_order_acq_rel)) {
        counters_.success(thread);
        std::vector<T> out;
        out.reserve(k);
        std::uint32_t idx = link_index(top);
        for (std::size_t i = 0; i < k; ++i) {
          out.push_back(pool_[idx].value.load(std::memory_order_relaxed));
          const std::uint32_t next = pool_[idx].next.load(std::memory_order_relaxed);
          free_.release(idx);
          idx = next;
        }
        return out;
      }
    }
  }

  std::optional<T> pop(int thread) {
    auto got = pop_multi(thread, 1);
    if (!got) return std::nullopt;
    return got->front();
  }

  const Instrumentation& counters() const { return counters_; }

 private:
  detail::NodePool<Node> pool_;
  detail::FreeList<Node> free_;
  Instrumentation counters_;
  alignas(kCacheLine) std::atomic<std::uint64_t> top_{pack_link(kNil, 0)};
};

// ---------------------------------------------------------------------------
// Shared counter: fetch-and-increment spelled as a Read + CAS retry loop

class CasCounter {
 public:
  explicit CasCounter(int threads) : counters_(threads) {}

  std::uint64_t increment(int thread) {
    std::uint64_t seen = cell_.load(std::memory_order_acquire);
    while (true) {
      counters_.attempt(thread);
      if (cell_.compare_exchange_weak(seen, seen + 1, std::memory_order_acq_rel)) {
        counters_.success(thread);
        return seen;
      }
    }
  }

  std::uint64_t value() const { return cell_.load(std::memory_order_acquire); }
  const Instrumentation& counters() const { return counters_; }

 private:
  Instrumentation counters_;
  alignas(kCacheLine) std::atomic<std::uint64_t> cell_{0};
};

// ---------------------------------------------------------------------------
// Michael-Scott queue with helping

template <typename T>
class MsQueue {
  static_assert(std::is_trivially_copyable_v<T>);

  struct Node {
    std::atomic<T> value{};
    std::atomic<std::uint64_t> next{pack_link(kNil, 0)};
    std::atomic<std::uint32_t> free_next{kNil};
  };

 public:
  MsQueue(std::size_t capacity, int threads, std::size_t stride_lines = 1)
      : pool_(capacity + 1, stride_lines),
        free_(pool_, 0, static_cast<std::uint32_t>(capacity + 1)),
        counters_(threads) {
    const std::uint32_t dummy = free_.acquire();
    pool_[dummy].next.store(pack_link(kNil, 0), std::memory_order_relaxed);
    head_.store(pack_link(dummy, 0), std::memory_order_relaxed);
    tail_.store(pack_link(dummy, 0), std::memory_order_relaxed);
  }

  bool enqueue(int thread, const T& value) {
    const std::uint32_t idx = free_.acquire();
    if (idx == kNil) return false;
    pool_[idx].value.store(value, std::memory_order_relaxed);
    const std::uint64_t stale = pool_[idx].next.load(std::memory_order_relaxed);
    pool_[idx].next.store(pack_link(kNil, link_tag(stale) + 1), std::memory_order_relaxed);

    while (true) {
      std::uint64_t tail = tail_.load(std::memory_order_acquire);
      std::uint64_t next = pool_[link_index(tail)].next.load(std::memory_order_acquire);
      if (tail != tail_.load(std::memory_order_acquire)) continue;
      if (link_index(next) == kNil) {
        // steady state: attach our node (the linearizing CAS)
        counters_.attempt(thread);
        if (pool_[link_index(tail)].next.compare_exchange_weak(
                next, pack_link(idx, link_tag(next) + 1), std::memory_order_acq_rel)) {
          counters_.success(thread);
          tail_.compare_exchange_strong(tail, pack_link(idx, link_tag(tail) + 1),
                                        std::memory_order_acq_rel);
          return true;
        }
      } else {
        // transient state: help the previous enqueue finish its second step
        tail_.compare_exchange_strong(tail, pack_link(link_index(next), link_tag(tail) + 1),
                                      std::memory_order_acq_rel);
      }
    }
  }

  std::optional<T> dequeue(int thread) {
    while (true) {
      std::uint64_t head = head_.load(std::memory_order_acquire);
      std::uint64_t tail = tail_.load(std::memory_order_acquire);
      const std::uint64_t next = pool_[link_index(head)].next.load(std::memory_order_acquire);
      if (head != head_.load(std::memory_order_acquire)) continue;
      if (link_index(head) == link_index(tail)) {
        if (link_index(next) == kNil) return std::nullopt;
        tail_.compare_exchange_strong(tail, pack_link(link_index(next), link_tag(tail) + 1),
                                      std::memory_order_acq_rel);
        continue;
      }
      const T value = pool_[link_index(next)].value.load(std::memory_order_relaxed);
      counters_.attempt(thread);
      if (head_.compare_exchange_weak(head, pack_link(link_index(next), link_tag(head) + 1),
                                      std::memory_order_acq_rel)) {
        counters_.success(thread);
        free_.release(link_index(head));
        return value;
      }
    }
  }

  const Instrumentation& counters() const { return counters_; }

 private:
  detail::NodePool<Node> pool_;
  detail::FreeList<Node> free_;
  Instrumentation counters_;
  alignas(kCacheLine) std::atomic<std::uint64_t> head_{0};
  alignas(kCacheLine) std::atomic<std::uint64_t> tail_{0};
};

}  // namespace retrylab::lf
