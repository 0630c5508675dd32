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

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "dlist/arena.hpp"
#include "dlist/atomics.hpp"
#include "dlist/history.hpp"
#include "dlist/item.hpp"
#include "dlist/sim.hpp"
#include "dlist/stats.hpp"
#include "dlist/types.hpp"

namespace dlist {

/// Row of a verification snapshot (application nodes only).
struct SnapRow {
  int64_t key = 0;
  int64_t ts = 0;
  ServerId origin_sid = 0;
  bool is_deleted = false;

  bool operator==(const SnapRow&) const = default;
};

/// One server: a node arena, shared counters, an rdcss domain, a logical
/// clock and the sublist registry, plus the lock-free local list engine.
/// Protocol handlers (AM/TR) layer counter gating and messaging on top.
class Server {
 public:
  struct Options {
    size_t arena_capacity = 1 << 16;
    size_t rdcss_capacity = 1 << 16;
    Tick ref_ttl = 700;
  };

  Server(ServerId sid, const Options& opts, Sim* sim = nullptr,
         NodeLifetimes* lifetimes = nullptr, RunStats* stats = nullptr);

  ServerId sid() const { return sid_; }
  Arena& arena() { return arena_; }
  RdcssDomain& rdcss() { return rdcss_; }
  SharedCounter& logical_clock() { return clock_; }

  // -- counters ------------------------------------------------------------
  uint32_t new_counter(int64_t init = 0);
  SharedCounter& counter(uint32_t handle);
  int64_t counter_get(uint32_t handle);

  // -- refs and nodes ------------------------------------------------------
  Node* resolve(const ItemRef& r);
  ItemRef ref_of(uint32_t slot);
  /// Stamp a ref with a fresh client lease.
  ItemRef leased(ItemRef r);
  Tick now() const;

  /// Allocate an unpublished node; fields are set before linking.
  uint32_t alloc_slot() { return arena_.alloc(); }

  ItemRef make_sentinel(KeyKind kind, uint32_t start_handle,
                        uint32_t end_handle);

  // -- registry ------------------------------------------------------------
  std::map<uint64_t, RegistryEntry>& registry() { return registry_; }
  RegistryEntry* find_entry(const ItemRef& subhead);

  // -- core list operations (Alg. 1 shape) ----------------------------------
  struct InsertResult {
    Status st = Status::Ok;
    ItemRef ref;
  };

  /// Link a new node with `key` immediately after prev. Retries the rdcss
  /// internally; fails only if prev is deleted. Handles, forwarding hint
  /// and a fresh timestamp are copied onto the node on every attempt.
  InsertResult insert_after(const ItemRef& prev, int64_t key);

  Status delete_node(const ItemRef& ref);

  struct NextOutcome {
    enum class Kind {
      Local,             // ref is the answer
      DelegateMoved,     // sublist moved: continue at ref on ref.sid
      DelegateBoundary,  // crossed into a remote sublist at ref
      End,               // ran past the final subtail
      Unknown,           // ref no longer resolvable
    };
    Kind kind = Kind::End;
    ItemRef ref;
  };

  NextOutcome next_from(const ItemRef& prev);

  struct LookupHit {
    ItemRef ref;
    NodeIdentity id;
  };

  struct LookupOutcome {
    bool delegate = false;
    ItemRef delegate_to;  // remote subhead
    std::vector<LookupHit> hits;
  };

  LookupOutcome lookup_sublist(const ItemRef& subhead, int64_t key);

  /// Lookup across every sublist this server owns (no delegation follow-up;
  /// callers in the distributed runtime handle LookupOutcome::delegate).
  std::vector<LookupHit> lookup_local(int64_t key);

  struct GetItemResult {
    Status st = Status::Ok;
    ItemRef ref;  // possibly forwarded
    ItemSnapshot item;
  };

  GetItemResult get_item(const ItemRef& ref);

  /// Physically unlink logically deleted nodes in every owned sublist.
  /// Returns the number delinked, or nullopt if a transformation op is
  /// active on any owned sublist.
  std::optional<size_t> delink_pass(Tick quarantine_until);

  // -- verification aids (peek-based; do not perturb the schedule) ---------
  std::vector<SnapRow> snapshot_sublist(const ItemRef& subhead) const;
  std::vector<uint32_t> sublist_slots(const ItemRef& subhead) const;
  size_t sublist_length(const ItemRef& subhead) const;
  ItemSnapshot snapshot_node(const Node& n) const;

  /// rdcss-success order of inserts, for schedule-enumeration oracles.
  const std::vector<std::pair<uint64_t, ItemRef>>& insert_order() const {
    return insert_order_;
  }
  void clear_insert_order() { insert_order_.clear(); }

  /// Fired at each successful insert/delete linearization; the runtime uses
  /// it to feed the reconstruction oracle during a Move.
  struct UpdateHookEvent {
    bool is_insert = false;
    NodeIdentity prev;
    NodeIdentity node;
    int64_t key = 0;
    uint32_t start_handle = 0;
    uint64_t seq = 0;
  };
  void set_update_hook(std::function<void(const UpdateHookEvent&)> h) {
    update_hook_ = std::move(h);
  }

  uint64_t next_seq();

 private:
  friend class World;

  uint64_t read_next(Node* n) { return rdcss_.read(&n->next); }

  ServerId sid_;
  Options opts_;
  Arena arena_;
  RdcssDomain rdcss_;
  std::deque<SharedCounter> counters_;
  SharedCounter clock_{0};  // first application ts is 1
  std::map<uint64_t, RegistryEntry> registry_;
  Sim* sim_;
  NodeLifetimes* lifetimes_;
  RunStats* stats_;
  std::function<void(const UpdateHookEvent&)> update_hook_;
  std::vector<std::pair<uint64_t, ItemRef>> insert_order_;
  uint64_t fallback_seq_ = 0;  // native mode ordering
};

}  // namespace dlist
