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
#include <cstdint>
#include <vector>

#include "dlist/item.hpp"
#include "dlist/types.hpp"

namespace dlist {

/// Slab of node slots with generation counters. A ref is valid only while
/// its generation matches the slot's; release bumps the generation so stale
/// refs are detected instead of dereferenced.
class Arena {
 public:
  explicit Arena(size_t capacity);

  /// Grab a fresh slot. Safe from concurrent native threads.
  uint32_t alloc();

  /// Make a stale-ref detectable: bump generation and recycle the slot.
  /// Only called from contexts that cannot race a traversal.
  void release(uint32_t slot);

  /// Park a slot until the grace period ends; sweep() releases it.
  void quarantine(uint32_t slot, Tick release_at);
  void sweep(Tick now);

  Node* get(uint32_t slot, uint32_t gen);
  Node& raw(uint32_t slot) { return slots_[slot].node; }
  uint32_t gen(uint32_t slot) const { return slots_[slot].gen; }
  bool live(uint32_t slot) const { return slots_[slot].live; }

  size_t live_count() const;
  size_t high_water() const { return bump_.load(std::memory_order_relaxed); }

  /// Count of gen-mismatch lookups; legal runs keep this at zero.
  uint64_t stale_hits() const { return stale_hits_; }

 private:
  struct Slot {
    uint32_t gen = 1;
    bool live = false;
    Node node;
  };

  std::vector<Slot> slots_;
  std::atomic<uint32_t> bump_{0};
  std::vector<uint32_t> free_list_;
  std::vector<std::pair<Tick, uint32_t>> quarantined_;
  uint64_t stale_hits_ = 0;
};

}  // namespace dlist
