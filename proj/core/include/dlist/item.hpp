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

#include "dlist/atomics.hpp"
#include "dlist/types.hpp"

namespace dlist {

/// One list node as stored in a server arena. key_value, ts and origin_sid
/// are fixed before the node is published by the linking rdcss; everything
/// else is mutated through the atomic cells.
struct Node {
  AtomicWord key_kind;      // KeyKind; Dummy -> SubTail is the only change
  int64_t key_value = 0;
  AtomicWord next;          // packed ItemRef; rdcss data cell
  AtomicWord is_deleted;    // 0/1; rdcss control cell
  AtomicWord start_count;   // counter handle (0 = none)
  AtomicWord end_count;
  AtomicWord new_location;  // packed ItemRef; 0 = not moved
  int64_t ts = 0;
  ServerId origin_sid = 0;

  KeyKind kind_now() { return KeyKind(key_kind.load()); }
  KeyKind kind_peek() const { return KeyKind(key_kind.peek()); }
  NodeIdentity identity() const { return NodeIdentity{origin_sid, ts}; }
};

/// Value snapshot of a node as carried by Move/Replicate messages.
struct ItemSnapshot {
  KeyKind kind = KeyKind::App;
  int64_t key = 0;
  bool is_deleted = false;
  ItemRef next;          // meaningful for SubTail moves
  ItemRef new_location;  // replay start hint
  int64_t ts = 0;
  ServerId origin_sid = 0;

  NodeIdentity identity() const { return NodeIdentity{origin_sid, ts}; }
};

/// Entry in the per-server sublist registry.
struct RegistryEntry {
  ItemRef subhead;
  uint32_t start_count = 0;  // counter handles
  uint32_t end_count = 0;
  int64_t offset = 0;
  ItemRef prev_subtail;
  // Sorted variant: keys owned are in (key_min, key_max].
  bool has_range = false;
  int64_t key_min = 0;
  int64_t key_max = 0;
  // Artifact bookkeeping (not protocol state).
  uint64_t logical_id = 0;

  enum class Mode : uint8_t { Idle, Splitting, Moving, Switching, Delinking };
  Mode mode = Mode::Idle;
};

}  // namespace dlist
