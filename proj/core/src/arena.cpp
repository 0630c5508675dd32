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

#include "dlist/arena.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

namespace dlist {

Arena::Arena(size_t capacity) : slots_(capacity) {}

uint32_t Arena::alloc() {
  if (!free_list_.empty()) {
    uint32_t s = free_list_.back();
    free_list_.pop_back();
    slots_[s].live = true;
    return s;
  }
  uint32_t s = bump_.fetch_add(1, std::memory_order_relaxed);
  if (s >= slots_.size()) {
    std::fprintf(stderr, "arena exhausted (%zu slots)\n", slots_.size());
    std::abort();
  }
  slots_[s].live = true;
  return s;
}

void Arena::release(uint32_t slot) {
  Slot& s = slots_[slot];
  s.gen += 1;
  s.live = false;
  // Reset mutable cells so a recycled slot starts clean.
  s.node.next.init(0);
  s.node.is_deleted.init(0);
  s.node.start_count.init(0);
  s.node.end_count.init(0);
  s.node.new_location.init(0);
  s.node.ts = 0;
  s.node.origin_sid = 0;
  free_list_.push_back(slot);
}

void Arena::quarantine(uint32_t slot, Tick release_at) {
  slots_[slot].live = false;
  quarantined_.emplace_back(release_at, slot);
}

void Arena::sweep(Tick now) {
  auto it = std::partition(
      quarantined_.begin(), quarantined_.end(),
      [now](const std::pair<Tick, uint32_t>& q) { return q.first > now; });
  for (auto r = it; r != quarantined_.end(); ++r) release(r->second);
  quarantined_.erase(it, quarantined_.end());
}

Node* Arena::get(uint32_t slot, uint32_t gen) {
  if (slot >= slots_.size()) {
    ++stale_hits_;
    return nullptr;
  }
  Slot& s = slots_[slot];
  if (s.gen != gen || !s.live) {
    ++stale_hits_;
    return nullptr;
  }
  return &s.node;
}

size_t Arena::live_count() const {
  size_t n = 0;
  size_t hw = bump_.load(std::memory_order_relaxed);
  for (size_t i = 0; i < hw && i < slots_.size(); ++i) {
    if (slots_[i].live) ++n;
  }
  return n;
}

}  // namespace dlist
