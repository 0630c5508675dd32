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

#include <atomic>
#include <cassert>
#include <cstdint>
#include <vector>

#include "dlist/sim.hpp"
#include "dlist/types.hpp"

namespace dlist {

/// Single machine word. Every load/cas is a scheduling point under the
/// deterministic simulator and a plain std::atomic access natively.
class AtomicWord {
 public:
  AtomicWord() : v_(0) {}
  explicit AtomicWord(uint64_t init) : v_(init) {}

  AtomicWord(const AtomicWord&) = delete;
  AtomicWord& operator=(const AtomicWord&) = delete;

  uint64_t load() {
    sim_yield_point();
    return v_.load(std::memory_order_seq_cst);
  }

  void store(uint64_t w) {
    sim_yield_point();
    v_.store(w, std::memory_order_seq_cst);
  }

  bool cas(uint64_t expected, uint64_t desired) {
    sim_yield_point();
    return v_.compare_exchange_strong(expected, desired,
                                      std::memory_order_seq_cst);
  }

  /// Initialization before the word is shared; not a scheduling point.
  void init(uint64_t w) { v_.store(w, std::memory_order_relaxed); }

  /// Verification-only read that does not perturb the schedule.
  uint64_t peek() const { return v_.load(std::memory_order_seq_cst); }

 private:
  std::atomic<uint64_t> v_;
};

inline uint64_t to_word(int64_t v) { return uint64_t(v); }
inline int64_t from_word(uint64_t w) { return int64_t(w); }

/// Signed atomic counter built on cas. The reserved sentinel stays negative
/// under any realistic number of future increments.
class SharedCounter {
 public:
  static constexpr int64_t kNegInf = -(int64_t(1) << 62);

  SharedCounter() = default;
  explicit SharedCounter(int64_t init) { cell_.init(to_word(init)); }

  /// Atomic increment; returns the post-increment value.
  int64_t increment() {
    for (;;) {
      uint64_t w = cell_.load();
      int64_t v = from_word(w);
      if (cell_.cas(w, to_word(v + 1))) return v + 1;
    }
  }

  int64_t get() { return from_word(cell_.load()); }

  bool cas_value(int64_t expected, int64_t desired) {
    return cell_.cas(to_word(expected), to_word(desired));
  }

  int64_t peek() const { return from_word(cell_.peek()); }

  /// Pre-sharing initialization; not a scheduling point.
  void reset(int64_t v) { cell_.init(to_word(v)); }

 private:
  AtomicWord cell_;
};

/// Restricted double-compare single-swap descriptor. Lives in a side table;
/// the word installed into the data cell is (index << 1) | 1 so it can never
/// be confused with an application word.
struct RdcssDescriptor {
  AtomicWord* control = nullptr;
  uint64_t expected_control = 0;
  AtomicWord* data = nullptr;
  uint64_t expected_data = 0;
  uint64_t new_data = 0;
  AtomicWord outcome;  // 0 undecided, 1 succeeded, 2 failed

  static constexpr uint64_t kUndecided = 0;
  static constexpr uint64_t kSucceeded = 1;
  static constexpr uint64_t kFailed = 2;
};

/// Descriptor table for one server. Descriptors are allocated by bumping an
/// index into preallocated storage and are never recycled within a run, so
/// helpers can always dereference a tagged word they observed.
class RdcssDomain {
 public:
  explicit RdcssDomain(size_t capacity = 1 << 16);

  /// The five-argument conditional swap: iff *control == expected_control
  /// and *data == expected_data, set *data = new_data. Returns true iff
  /// both comparisons held and the swap was performed.
  bool rdcss(AtomicWord* control, uint64_t expected_control, AtomicWord* data,
             uint64_t expected_data, uint64_t new_data);

  /// Read a data cell that rdcss may target, helping any in-flight
  /// descriptor to completion first. Never returns a descriptor tag.
  uint64_t read(AtomicWord* cell);

  size_t allocated() const { return next_.load(std::memory_order_relaxed); }

 private:
  void help(uint64_t tagged_word);

  std::vector<RdcssDescriptor> pool_;
  std::atomic<size_t> next_{0};
};

}  // namespace dlist
