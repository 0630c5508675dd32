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

#include <vector>

#include "dlist/history.hpp"
#include "dlist/net.hpp"
#include "dlist/sim.hpp"
#include "dlist/types.hpp"

namespace dlist {

class World;

/// Client stub: broadcast lookups, routed updates, lease bookkeeping and a
/// pool of refs obtained from earlier operations (the context).
class Client {
 public:
  struct Held {
    ItemRef ref;
    NodeIdentity id;
    int64_t key = 0;
    bool sentinel = false;
  };

  struct OpResult {
    Status st = Status::Ok;
    std::vector<ItemRef> refs;
    std::vector<NodeIdentity> ids;
    int64_t aux = 0;
  };

  Client(World* world, uint32_t idx, EndpointId ep, uint64_t seed);

  EndpointId endpoint() const { return ep_; }
  uint32_t index() const { return idx_; }
  std::vector<Held>& pool() { return pool_; }
  Rng& rng() { return rng_; }

  /// Seeded op loop; runs as one fiber until the world's budget is spent.
  void workload();

  // Individual operations (also driven directly by tests). Each records
  // invoke/respond in the world history.
  OpResult lookup(int64_t key);
  OpResult insert_after(const ItemRef& prev, int64_t key);
  OpResult del(const ItemRef& ref);
  OpResult next(const ItemRef& prev);
  OpResult get_item(const ItemRef& ref);

  OpResult sorted_insert(int64_t key);
  OpResult sorted_delete(int64_t key);
  OpResult sorted_search(int64_t key);

 private:
  void remember(const ItemRef& ref, const NodeIdentity& id, int64_t key,
                bool sentinel = false);
  void forget(const ItemRef& ref);
  int pick_pool_index();
  void one_op();
  void one_sorted_op();
  OpResult roundtrip(Message m, OpKind kind);

  World* w_;
  uint32_t idx_;
  EndpointId ep_;
  Rng rng_;
  std::vector<Held> pool_;
};

}  // namespace dlist
