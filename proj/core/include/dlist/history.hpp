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
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "dlist/types.hpp"

namespace dlist {

enum class OpKind : uint8_t {
  InsertAfter,
  Delete,
  Next,
  Lookup,
  GetItem,
  SortedInsert,
  SortedDelete,
  SortedSearch,
};

const char* op_kind_name(OpKind k);

/// One invoke or respond record. seq gives the real-time total order the
/// linearizability checker relies on.
struct HistEvent {
  uint64_t seq = 0;
  Tick tick = 0;
  uint32_t worker = 0;
  bool invoke = false;
  uint64_t op_id = 0;
  OpKind op = OpKind::InsertAfter;
  ItemRef arg_ref;
  int64_t arg_key = 0;
  Status st = Status::Ok;
  std::vector<ItemRef> result_refs;
  std::vector<NodeIdentity> result_ids;  // canonical identities for lookups
};

class History {
 public:
  uint64_t record_invoke(uint64_t seq, Tick tick, uint32_t worker, OpKind op,
                         const ItemRef& arg_ref, int64_t arg_key);
  void record_respond(uint64_t seq, Tick tick, uint32_t worker, uint64_t op_id,
                      Status st, std::vector<ItemRef> refs = {},
                      std::vector<NodeIdentity> ids = {});

  const std::vector<HistEvent>& events() const { return events_; }
  size_t op_count() const { return next_op_id_; }
  void clear();

  bool write_file(const std::string& path, const std::string& header) const;

 private:
  std::vector<HistEvent> events_;
  uint64_t next_op_id_ = 0;
};

inline constexpr uint64_t kNoDeath = std::numeric_limits<uint64_t>::max();

/// Birth/death instants per logical node, keyed by (origin server, ts).
/// A node may materialize on several servers after a Move; the earliest
/// client-caused tombstone ends its live window.
class NodeLifetimes {
 public:
  void on_birth(const NodeIdentity& id, int64_t key, uint64_t seq);
  void on_death(const NodeIdentity& id, uint64_t seq);

  struct Window {
    int64_t key = 0;
    uint64_t birth = 0;
    uint64_t death = kNoDeath;
  };

  const std::map<NodeIdentity, Window>& windows() const { return windows_; }

 private:
  std::map<NodeIdentity, Window> windows_;
};

}  // namespace dlist
