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

#include <cstdint>
#include <string>

namespace dlist {

using Tick = int64_t;
using ServerId = uint32_t;
using EndpointId = uint32_t;

/// Kind of value stored in a node's key cell. App carries a client key;
/// the rest are sentinels disjoint from the application key space.
enum class KeyKind : uint8_t {
  App = 0,
  Head = 1,
  Tail = 2,
  SubHead = 3,
  SubTail = 4,
  Dummy = 5,
};

inline bool is_sentinel(KeyKind k) { return k != KeyKind::App; }

/// SubHead-like sentinels begin a sublist; SubTail-like ones end it.
inline bool is_subhead_kind(KeyKind k) {
  return k == KeyKind::SubHead || k == KeyKind::Head;
}
inline bool is_subtail_kind(KeyKind k) {
  return k == KeyKind::SubTail || k == KeyKind::Tail;
}

const char* key_kind_name(KeyKind k);

/// Locator for one node: server, arena slot, slot generation, plus the
/// client-side lease deadline. The (sid, slot, gen) triple is unique for
/// the life of the system; lease_deadline only matters on refs handed to
/// clients and is ignored for list linkage.
struct ItemRef {
  ServerId sid = 0;
  uint32_t slot = 0;
  uint32_t gen = 0;        // 0 means nil
  Tick lease_deadline = 0; // not part of identity

  bool is_nil() const { return gen == 0; }
  bool same_node(const ItemRef& o) const {
    return sid == o.sid && slot == o.slot && gen == o.gen;
  }
};

inline constexpr ItemRef kNilRef{};

// Linkage/word encoding: bit 0 is reserved as the RDCSS descriptor tag, so
// packed refs occupy bits [1,63]: gen:31, slot:24, sid:8.
inline constexpr int kGenBits = 31;
inline constexpr int kSlotBits = 24;
inline constexpr int kSidBits = 8;

inline uint64_t pack_ref(const ItemRef& r) {
  if (r.gen == 0) return 0;
  uint64_t w = (uint64_t(r.sid) << (kGenBits + kSlotBits)) |
               (uint64_t(r.slot) << kGenBits) | uint64_t(r.gen);
  return w << 1;
}

inline ItemRef unpack_ref(uint64_t w) {
  ItemRef r;
  if (w == 0) return r;
  w >>= 1;
  r.gen = uint32_t(w & ((1ull << kGenBits) - 1));
  r.slot = uint32_t((w >> kGenBits) & ((1ull << kSlotBits) - 1));
  r.sid = uint32_t(w >> (kGenBits + kSlotBits));
  return r;
}

inline bool is_descriptor_word(uint64_t w) { return (w & 1u) != 0; }

/// Node identity that survives a Move: (originating server, timestamp).
/// Application nodes have ts >= 1; sentinels have ts = 0.
struct NodeIdentity {
  ServerId origin_sid = 0;
  int64_t ts = 0;

  bool operator==(const NodeIdentity&) const = default;
  auto operator<=>(const NodeIdentity&) const = default;
};

std::string ref_to_string(const ItemRef& r);

/// Outcome codes shared by client-visible operations.
enum class Status : uint8_t {
  Ok = 0,
  NotFound,        // delete/insert at an already-deleted node
  SentinelTarget,  // op aimed at Head/Tail/SubTail
  UnknownRef,      // generation mismatch: node reclaimed
  LeaseExpired,
  DuplicateKey,    // sorted insert
  Busy,            // transformation op already active
  NotCovered,      // sorted routing: key outside this server's ranges
  Timeout,
  ProtocolError,
};

const char* status_name(Status s);

}  // namespace dlist
