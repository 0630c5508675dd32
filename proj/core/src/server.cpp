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

#include "dlist/server.hpp"

#include <cassert>

namespace dlist {

Server::Server(ServerId sid, const Options& opts, Sim* sim,
               NodeLifetimes* lifetimes, RunStats* stats)
    : sid_(sid),
      opts_(opts),
      arena_(opts.arena_capacity),
      rdcss_(opts.rdcss_capacity),
      sim_(sim),
      lifetimes_(lifetimes),
      stats_(stats) {}

uint32_t Server::new_counter(int64_t init) {
  counters_.emplace_back(init);
  return uint32_t(counters_.size());  // 1-based handle
}

SharedCounter& Server::counter(uint32_t handle) {
  assert(handle != 0 && handle <= counters_.size());
  return counters_[handle - 1];
}

int64_t Server::counter_get(uint32_t handle) {
  return handle == 0 ? 0 : counter(handle).get();
}

Node* Server::resolve(const ItemRef& r) {
  if (r.is_nil() || r.sid != sid_) return nullptr;
  return arena_.get(r.slot, r.gen);
}

ItemRef Server::ref_of(uint32_t slot) {
  ItemRef r;
  r.sid = sid_;
  r.slot = slot;
  r.gen = arena_.gen(slot);
  return r;
}

Tick Server::now() const { return sim_ ? sim_->now() : 0; }

ItemRef Server::leased(ItemRef r) {
  r.lease_deadline = now() + opts_.ref_ttl;
  return r;
}

uint64_t Server::next_seq() {
  return sim_ ? sim_->next_seq() : ++fallback_seq_;
}

ItemRef Server::make_sentinel(KeyKind kind, uint32_t start_handle,
                              uint32_t end_handle) {
  uint32_t slot = arena_.alloc();
  Node& n = arena_.raw(slot);
  n.key_kind.init(uint64_t(kind));
  n.key_value = 0;
  n.next.init(0);
  n.is_deleted.init(0);
  n.start_count.init(start_handle);
  n.end_count.init(end_handle);
  n.new_location.init(0);
  n.ts = 0;  // sentinels sit below every application timestamp
  n.origin_sid = sid_;
  return ref_of(slot);
}

RegistryEntry* Server::find_entry(const ItemRef& subhead) {
  auto it = registry_.find(pack_ref(subhead));
  return it == registry_.end() ? nullptr : &it->second;
}

Server::InsertResult Server::insert_after(const ItemRef& prev_ref,
                                          int64_t key) {
  Node* prev = resolve(prev_ref);
  if (!prev) return {Status::UnknownRef, {}};
  if (is_subtail_kind(prev->kind_now())) return {Status::SentinelTarget, {}};

  uint32_t slot = arena_.alloc();
  Node& nn = arena_.raw(slot);
  for (;;) {
    if (prev->is_deleted.load() != 0) {
      arena_.release(slot);  // never published
      return {Status::NotFound, {}};
    }
    uint64_t temp = read_next(prev);
    nn.key_kind.init(uint64_t(KeyKind::App));
    nn.key_value = key;
    nn.next.init(temp);
    nn.is_deleted.init(0);
    nn.start_count.init(prev->start_count.load());
    nn.end_count.init(prev->end_count.load());
    nn.new_location.init(prev->new_location.load());
    // A failed linking attempt redraws the timestamp, so rdcss success
    // order and timestamp order agree at any given prev.
    nn.ts = clock_.increment();
    nn.origin_sid = sid_;
    ItemRef nref = ref_of(slot);
    if (rdcss_.rdcss(&prev->is_deleted, 0, &prev->next, temp,
                     pack_ref(nref))) {
      uint64_t seq = next_seq();
      if (lifetimes_) lifetimes_->on_birth(nn.identity(), key, seq);
      if (sim_) insert_order_.emplace_back(seq, nref);
      if (update_hook_) {
        update_hook_({true, prev->identity(), nn.identity(), key,
                      uint32_t(nn.start_count.peek()), seq});
      }
      return {Status::Ok, nref};
    }
  }
}

Status Server::delete_node(const ItemRef& ref) {
  Node* n = resolve(ref);
  if (!n) return Status::UnknownRef;
  if (is_sentinel(n->kind_now())) return Status::SentinelTarget;
  for (;;) {
    if (n->is_deleted.load() != 0) return Status::NotFound;
    if (n->is_deleted.cas(0, 1)) {
      uint64_t seq = next_seq();
      if (lifetimes_) lifetimes_->on_death(n->identity(), seq);
      if (update_hook_) {
        update_hook_({false, {}, n->identity(), n->key_value,
                      uint32_t(n->start_count.peek()), seq});
      }
      return Status::Ok;
    }
  }
}

Server::NextOutcome Server::next_from(const ItemRef& prev_ref) {
  Node* prev = resolve(prev_ref);
  if (!prev) return {NextOutcome::Kind::Unknown, {}};

  Node* curr = prev;
  ItemRef curr_ref = prev_ref;
  for (;;) {
    // Advance, skipping tombstones, dummies and subheads.
    for (;;) {
      uint64_t w = read_next(curr);
      ItemRef nxt = unpack_ref(w);
      if (nxt.is_nil()) return {NextOutcome::Kind::End, {}};
      if (nxt.sid != sid_) {
        // Only reachable via a retired subtail; continue remotely.
        return {NextOutcome::Kind::DelegateBoundary, nxt};
      }
      Node* n = resolve(nxt);
      if (!n) return {NextOutcome::Kind::Unknown, {}};
      curr = n;
      curr_ref = nxt;
      KeyKind k = curr->kind_now();
      if (k == KeyKind::Dummy || is_subhead_kind(k)) continue;
      if (curr->is_deleted.load() != 0) continue;
      break;
    }
    if (counter_get(uint32_t(curr->start_count.load())) < 0) {
      ItemRef fwd = unpack_ref(prev->new_location.load());
      return {NextOutcome::Kind::DelegateMoved, fwd};
    }
    if (is_subtail_kind(curr->kind_now())) {
      uint64_t w = read_next(curr);
      ItemRef nxt = unpack_ref(w);
      if (nxt.is_nil()) return {NextOutcome::Kind::End, {}};
      if (nxt.sid != sid_) return {NextOutcome::Kind::DelegateBoundary, nxt};
      Node* n = resolve(nxt);
      if (!n) return {NextOutcome::Kind::Unknown, {}};
      // Same-server subhead: keep walking into the next sublist.
      curr = n;
      curr_ref = nxt;
      continue;
    }
    return {NextOutcome::Kind::Local, curr_ref};
  }
}

Server::LookupOutcome Server::lookup_sublist(const ItemRef& subhead,
                                             int64_t key) {
  LookupOutcome out;
  Node* head = resolve(subhead);
  if (!head) return out;  // entry raced a reclamation; nothing owned here
  if (counter_get(uint32_t(head->start_count.load())) < 0) {
    out.delegate = true;
    out.delegate_to = unpack_ref(head->new_location.load());
    return out;
  }
  Node* curr = head;
  for (;;) {
    uint64_t w = read_next(curr);
    ItemRef nxt = unpack_ref(w);
    if (nxt.is_nil() || nxt.sid != sid_) break;
    Node* n = resolve(nxt);
    if (!n) break;
    curr = n;
    if (is_subtail_kind(curr->kind_now())) break;
    if (curr->kind_now() == KeyKind::App && curr->key_value == key &&
        curr->is_deleted.load() == 0 &&
        counter_get(uint32_t(curr->start_count.load())) >= 0) {
      out.hits.push_back({nxt, curr->identity()});
    }
  }
  // The sublist may have finished moving while we scanned it.
  if (counter_get(uint32_t(curr->start_count.load())) < 0) {
    out.delegate = true;
    out.delegate_to = unpack_ref(head->new_location.load());
    out.hits.clear();
  }
  return out;
}

std::vector<Server::LookupHit> Server::lookup_local(int64_t key) {
  std::vector<LookupHit> all;
  for (auto& [packed, entry] : registry_) {
    auto out = lookup_sublist(entry.subhead, key);
    assert(!out.delegate && "lookup_local used in a distributed context");
    for (auto& h : out.hits) all.push_back(h);
  }
  return all;
}

Server::GetItemResult Server::get_item(const ItemRef& ref) {
  Node* n = resolve(ref);
  if (!n) return {Status::UnknownRef, {}, {}};
  GetItemResult r;
  r.st = Status::Ok;
  r.item = snapshot_node(*n);
  uint64_t moved = n->new_location.load();
  if (moved != 0 && counter_get(uint32_t(n->start_count.load())) < 0) {
    r.ref = leased(unpack_ref(moved));
  } else {
    r.ref = leased(ref);
  }
  return r;
}

std::optional<size_t> Server::delink_pass(Tick quarantine_until) {
  for (auto& [packed, entry] : registry_) {
    if (entry.mode != RegistryEntry::Mode::Idle) return std::nullopt;
  }
  size_t count = 0;
  for (auto& [packed, entry] : registry_) {
    entry.mode = RegistryEntry::Mode::Delinking;
    Node* prev = resolve(entry.subhead);
    if (!prev) {
      entry.mode = RegistryEntry::Mode::Idle;
      continue;
    }
    uint64_t curr_w = read_next(prev);
    for (;;) {
      ItemRef curr_ref = unpack_ref(curr_w);
      if (curr_ref.is_nil() || curr_ref.sid != sid_) break;
      Node* curr = resolve(curr_ref);
      if (!curr) break;
      if (is_subtail_kind(curr->kind_now())) break;
      if (curr->is_deleted.load() != 0 && curr->kind_now() == KeyKind::App) {
        uint64_t after = read_next(curr);
        if (prev->next.cas(curr_w, after)) {
          // Stranded traversers on curr rejoin at prev's current successor.
          curr->next.store(prev->next.load());
          arena_.quarantine(curr_ref.slot, quarantine_until);
          ++count;
          if (stats_) stats_->delinked_nodes++;
        }
        curr_w = read_next(prev);
      } else {
        prev = curr;
        curr_w = read_next(prev);
      }
    }
    entry.mode = RegistryEntry::Mode::Idle;
  }
  return count;
}

ItemSnapshot Server::snapshot_node(const Node& n) const {
  ItemSnapshot s;
  s.kind = n.kind_peek();
  s.key = n.key_value;
  s.is_deleted = n.is_deleted.peek() != 0;
  s.next = unpack_ref(n.next.peek());
  s.new_location = unpack_ref(n.new_location.peek());
  s.ts = n.ts;
  s.origin_sid = n.origin_sid;
  return s;
}

std::vector<SnapRow> Server::snapshot_sublist(const ItemRef& subhead) const {
  std::vector<SnapRow> rows;
  auto* self = const_cast<Server*>(this);
  Node* curr = self->resolve(subhead);
  while (curr) {
    uint64_t w = curr->next.peek();
    if (is_descriptor_word(w)) break;  // snapshots are taken at quiescence
    ItemRef nxt = unpack_ref(w);
    if (nxt.is_nil() || nxt.sid != sid_) break;
    Node* n = self->resolve(nxt);
    if (!n) break;
    curr = n;
    if (is_subtail_kind(curr->kind_peek())) break;
    if (curr->kind_peek() == KeyKind::App) {
      rows.push_back(SnapRow{curr->key_value, curr->ts, curr->origin_sid,
                             curr->is_deleted.peek() != 0});
    }
  }
  return rows;
}

std::vector<uint32_t> Server::sublist_slots(const ItemRef& subhead) const {
  std::vector<uint32_t> slots;
  auto* self = const_cast<Server*>(this);
  Node* curr = self->resolve(subhead);
  if (!curr) return slots;
  slots.push_back(subhead.slot);
  uint32_t here = subhead.slot;
  while (curr && !is_subtail_kind(curr->kind_peek())) {
    uint64_t w = curr->next.peek();
    if (is_descriptor_word(w)) break;
    ItemRef nxt = unpack_ref(w);
    if (nxt.is_nil() || nxt.sid != sid_) break;
    curr = self->resolve(nxt);
    here = nxt.slot;
    if (curr) slots.push_back(here);
  }
  return slots;
}

size_t Server::sublist_length(const ItemRef& subhead) const {
  return snapshot_sublist(subhead).size();
}

}  // namespace dlist
