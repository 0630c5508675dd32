/*
 * Copyright 2026 the dlist authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <ucontext.h>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dlist/types.hpp"

namespace dlist {

/// Deterministic PRNG (splitmix64). Used everywhere instead of <random>
/// distributions so traces are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, n). n must be > 0.
  uint64_t below(uint64_t n) { return next() % n; }

  /// Uniform in [lo, hi] inclusive.
  int64_t range(int64_t lo, int64_t hi) {
    return lo + int64_t(below(uint64_t(hi - lo + 1)));
  }

 private:
  uint64_t state_;
};

class Sim;

/// One cooperatively scheduled task with its own stack. Fibers interleave
/// only at explicit yield points (every atomic operation is one), which is
/// what makes schedules reproducible from a seed. Finished fibers donate
/// their slot and stack back for reuse.
class Fiber {
 public:
  enum class State { Runnable, Blocked, Done };

  uint32_t slot() const { return slot_; }
  const std::string& name() const { return name_; }
  State state() const { return state_; }

 private:
  friend class Sim;

  static void trampoline();

  Sim* sim_ = nullptr;
  uint32_t slot_ = 0;
  std::string name_;
  std::function<void()> fn_;
  std::vector<char> stack_;
  ucontext_t ctx_{};
  State state_ = State::Done;
  bool started_ = false;
  Tick wake_tick_ = -1;      // >= 0: sleeping until that tick
  uint64_t wait_key_ = 0;    // != 0: waiting on notify_event(key)
  Tick wait_deadline_ = -1;  // >= 0: event wait may time out
  bool timed_out_ = false;
  int run_pos_ = -1;         // index into the runnable set, -1 if absent
};

/// Pluggable schedule choice. The default draws from the seeded RNG; tests
/// install forced prefixes to enumerate interleavings exhaustively.
struct SchedulePolicy {
  std::vector<uint32_t> forced;  // consumed front to back
  std::vector<uint32_t> arity;   // branching factor per decision (if record)
  size_t cursor = 0;
  bool record = false;
};

/// Single-threaded deterministic scheduler with a virtual clock. Time only
/// advances when no fiber is runnable, so an in-flight traversal can never
/// span a timer-driven reclamation.
class Sim {
 public:
  explicit Sim(uint64_t seed);
  ~Sim();

  Sim(const Sim&) = delete;
  Sim& operator=(const Sim&) = delete;

  Tick now() const { return now_; }
  Rng& rng() { return rng_; }

  /// Monotonic event counter; the real-time order of everything.
  uint64_t next_seq() { return ++seq_; }
  uint64_t current_seq() const { return seq_; }

  Fiber* spawn(std::string name, std::function<void()> fn,
               size_t stack_size = 128 * 1024);

  /// From inside a fiber: give up the slice, stay runnable.
  void yield();

  /// From inside a fiber: sleep until the virtual clock reaches `t`
  /// (at least one tick).
  void wait_until(Tick t);

  /// From inside a fiber: block until notify_event(key). Returns false if
  /// `deadline` (>= 0) passed first.
  bool wait_event(uint64_t key, Tick deadline = -1);

  /// Wake every fiber blocked on `key`.
  void notify_event(uint64_t key);

  /// Network integration: messages ready for delivery now join the
  /// scheduling candidates; next_due feeds the clock advance.
  void set_external(std::function<size_t()> ready_count,
                    std::function<void(size_t)> deliver,
                    std::function<Tick()> next_due);

  /// Run until no fiber is runnable, no timer pending, and no external
  /// work remains. Returns scheduling decisions taken; `max_steps` (if
  /// non-zero) bounds them and marks the run as exhausted when hit.
  uint64_t run(uint64_t max_steps = 0);

  static Sim* current();
  static Fiber* current_fiber();

  SchedulePolicy& policy() { return policy_; }
  bool exhausted() const { return exhausted_; }
  bool stuck_on_event() const { return stuck_on_event_; }
  uint64_t steps_taken() const { return steps_; }
  size_t live_fibers() const;

 private:
  friend class Fiber;

  void switch_to(Fiber* f);
  void fiber_done(Fiber* f);
  size_t pick(size_t n_choices);
  void make_runnable(Fiber* f);
  void remove_runnable(Fiber* f);

  Tick now_ = 0;
  Rng rng_;
  uint64_t seq_ = 0;
  uint64_t steps_ = 0;
  bool exhausted_ = false;
  bool stuck_on_event_ = false;
  std::vector<std::unique_ptr<Fiber>> fibers_;
  std::vector<uint32_t> free_slots_;
  std::vector<Fiber*> runnable_;
  std::multimap<uint64_t, uint32_t> waiters_;  // event key -> fiber slot
  ucontext_t sched_ctx_{};
  Fiber* running_ = nullptr;
  SchedulePolicy policy_;

  std::function<size_t()> ext_ready_;
  std::function<void(size_t)> ext_deliver_;
  std::function<Tick()> ext_next_due_;
};

/// Yield point used by the atomics layer: no-op outside a simulation.
inline void sim_yield_point() {
  if (Sim::current_fiber() != nullptr) Sim::current()->yield();
}

}  // namespace dlist
