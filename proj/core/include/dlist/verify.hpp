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

#include <map>
#include <string>
#include <vector>

#include "dlist/history.hpp"
#include "dlist/server.hpp"
#include "dlist/types.hpp"

namespace dlist {
namespace verify {

/// Initial list contents for the sequential model: the single-sublist
/// fixture a checked history ran against.
struct LinFixture {
  ItemRef subhead;
  ItemRef subtail;
  std::vector<std::pair<ItemRef, int64_t>> nodes;  // in list order
};

/// Pure single-threaded list with the client API semantics; the reference
/// the linearizability checker replays candidate orders against.
class SeqListModel {
 public:
  explicit SeqListModel(const LinFixture& fixture);

  /// Try to apply one completed operation; false if the model's outcome
  /// contradicts the recorded response (the permutation is pruned).
  bool apply(const HistEvent& inv, const HistEvent& resp);

 private:
  struct MNode {
    int64_t key = 0;
    bool deleted = false;
    bool sentinel = false;
    bool subtail = false;
  };

  int resolve(const ItemRef& r) const;
  bool bind(const ItemRef& r, int id);

  std::vector<MNode> nodes_;         // by model id
  std::vector<int> order_;           // list order of model ids
  std::map<uint64_t, int> binding_;  // packed ref -> model id
};

struct Verdict {
  bool ok = true;
  std::string detail;
};

/// Exhaustive (pruned) search for a sequential witness that respects the
/// real-time order in the history. Histories are small by contract.
Verdict check_linearizable(const std::vector<HistEvent>& events,
                           const LinFixture& fixture, size_t max_ops = 32);

/// Every instance of the looked-up key that was alive for the whole call
/// must appear in the result.
Verdict check_lookup_property(const History& history,
                              const NodeLifetimes& lifetimes);

/// Source-order update events replayed by the reconstruction oracle.
struct UpdateEvent {
  enum class Kind : uint8_t { Insert, Delete };
  Kind kind = Kind::Insert;
  NodeIdentity prev;  // insert position (ts == 0 means at the subhead)
  NodeIdentity node;
  int64_t key = 0;
  uint64_t seq = 0;
};

/// Ground truth for reconstruction equivalence: apply events sequentially
/// in source order to the base sequence.
std::vector<SnapRow> replay_oracle(const std::vector<SnapRow>& base,
                                   const std::vector<UpdateEvent>& events);

/// startCount - endCount = offset for every active sublist of one server.
/// Only meaningful at quiescence. Retired (moved-away) sublists are skipped.
Verdict check_counter_invariant(Server& server);

std::string rows_to_string(const std::vector<SnapRow>& rows);

}  // namespace verify
}  // namespace dlist
