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

// Aborting Move: counter-gated updates, Split, Move with abort/retry, and
// Switch. Split and Switch are shared with the temporary-replication
// protocol.

#include <cassert>

#include "dlist/world.hpp"
#include "protocol_util.hpp"

namespace dlist {

using protocol::join_clock;
using protocol::live_snapshot;

// ---------------------------------------------------------------------------
// Counter-gated client updates (shared shape; TR adds the replicate twist).
// ---------------------------------------------------------------------------

World::OpOutcome World::update_insert(ServerId s, const ItemRef& prev_ref,
                                      int64_t key, uint64_t cause_req) {
  Server& srv = server(s);
  stats_.ops_insert++;
  Node* prev = srv.resolve(prev_ref);
  if (!prev) return {.st = Status::UnknownRef};
  if (is_subtail_kind(prev->kind_now())) return {.st = Status::SentinelTarget};

  uint32_t h = uint32_t(prev->start_count.load());
  if (h != 0) {
    srv.counter(h).increment();
    if (srv.counter(h).get() < 0) {
      OpOutcome o;
      o.delegated = true;
      o.delegate_to = unpack_ref(prev->new_location.load());
      return o;
    }
  }

  auto res = srv.insert_after(prev_ref, key);
  OpOutcome o;
  o.st = res.st;
  o.ref = res.ref;

  bool replicate = false;
  if (res.st == Status::Ok) {
    Node* nn = srv.resolve(res.ref);
    o.id = nn->identity();
    if (cfg_.protocol == Protocol::TR) {
      ItemRef nl = unpack_ref(nn->new_location.load());
      if (!nl.is_nil() && nl.sid != s) {
        // The insert landed behind a Move front: ship it by replication and
        // let the replay ack do the endCount increment.
        Message r;
        r.kind = MsgKind::ReplicateInsertAfter;
        r.src = s;
        r.dst = nl.sid;
        r.items = {live_snapshot(srv, prev), live_snapshot(srv, nn)};
        r.ref2 = res.ref;  // insert-replay callback target
        r.cause_req = cause_req;
        r.msg_id = 0;
        o.replicate_after_response = std::move(r);
        stats_.replicate_insert_sent++;
        replicate = true;
      }
    }
  }
  if (h != 0 && !replicate) {
    // Failure paths increment too, so the quiescent identity is preserved.
    uint32_t eh = uint32_t(prev->end_count.load());
    if (eh != 0) srv.counter(eh).increment();
  }
  return o;
}

World::OpOutcome World::update_delete(ServerId s, const ItemRef& ref,
                                      uint64_t cause_req) {
  Server& srv = server(s);
  stats_.ops_delete++;
  Node* n = srv.resolve(ref);
  if (!n) return {.st = Status::UnknownRef};
  if (is_sentinel(n->kind_now())) return {.st = Status::SentinelTarget};

  uint32_t h = uint32_t(n->start_count.load());
  if (h != 0) {
    srv.counter(h).increment();
    if (srv.counter(h).get() < 0) {
      OpOutcome o;
      o.delegated = true;
      o.delegate_to = unpack_ref(n->new_location.load());
      return o;
    }
  }

  Status st = srv.delete_node(ref);
  OpOutcome o;
  o.st = st;
  o.id = n->identity();

  bool replicate = false;
  if (st == Status::Ok && cfg_.protocol == Protocol::TR) {
    ItemRef nl = unpack_ref(n->new_location.load());
    if (!nl.is_nil() && nl.sid != s) {
      Message r;
      r.kind = MsgKind::ReplicateDelete;
      r.src = s;
      r.dst = nl.sid;
      r.items = {live_snapshot(srv, n)};
      r.ref2 = ref;
      r.cause_req = cause_req;
      o.replicate_after_response = std::move(r);
      stats_.replicate_delete_sent++;
      replicate = true;
    }
  }
  if (h != 0 && !replicate) {
    uint32_t eh = uint32_t(n->end_count.load());
    if (eh != 0) srv.counter(eh).increment();
  }
  return o;
}

// ---------------------------------------------------------------------------
// Split
// ---------------------------------------------------------------------------

World::SplitResult World::split(ServerId s, const ItemRef& subhead,
                                const ItemRef& node_ref) {
  Server& srv = server(s);
  RegistryEntry* e = srv.find_entry(subhead);
  if (!e || e->mode != RegistryEntry::Mode::Idle) return {Status::Busy, {}, {}};
  Node* node = srv.resolve(node_ref);
  if (!node || is_sentinel(node->kind_now())) return {Status::Busy, {}, {}};
  e->mode = RegistryEntry::Mode::Splitting;

  // Dummy (future subtail) + fresh subhead, linked as a block. The dummy
  // stays a dummy until the new sublist is registered, so in-flight lookups
  // are not truncated early.
  uint32_t old_start = e->start_count;
  uint32_t old_end = e->end_count;
  ItemRef st_ref = srv.make_sentinel(KeyKind::Dummy, old_start, old_end);
  ItemRef sh_ref = srv.make_sentinel(KeyKind::SubHead, old_start, old_end);
  Node* st = srv.resolve(st_ref);
  Node* sh = srv.resolve(sh_ref);
  st->next.store(pack_ref(sh_ref));
  for (;;) {
    uint64_t next_w = srv.rdcss().read(&node->next);
    sh->next.store(next_w);
    if (node->next.cas(next_w, pack_ref(st_ref))) break;
  }

  uint32_t new_start = srv.new_counter(0);
  uint32_t new_end = srv.new_counter(0);

  // Hand every node of the right half the new counters. A concurrent insert
  // can copy handles from a node an instant before we repoint it, so verify
  // and re-walk until the half is clean.
  for (;;) {
    Node* curr = sh;
    for (;;) {
      curr->start_count.store(new_start);
      curr->end_count.store(new_end);
      if (is_subtail_kind(curr->kind_now())) break;
      ItemRef nxt = unpack_ref(srv.rdcss().read(&curr->next));
      Node* n = srv.resolve(nxt);
      if (!n) break;
      curr = n;
    }
    bool clean = true;
    curr = sh;
    for (;;) {
      if (uint32_t(curr->start_count.load()) != new_start ||
          uint32_t(curr->end_count.load()) != new_end) {
        clean = false;
        break;
      }
      if (is_subtail_kind(curr->kind_now())) break;
      ItemRef nxt = unpack_ref(srv.rdcss().read(&curr->next));
      Node* n = srv.resolve(nxt);
      if (!n) break;
      curr = n;
    }
    if (clean) break;
  }

  // Offset handshake: wait for an instant with no update pending on either
  // half, then distribute the old offset.
  int64_t a1 = 0;
  int64_t a2 = 0;
  for (;;) {
    a1 = srv.counter(new_start).get() - srv.counter(new_end).get();
    a2 = srv.counter(uint32_t(node->start_count.load())).get() -
         srv.counter(uint32_t(node->end_count.load())).get();
    if (a1 + a2 == e->offset) break;
    sim_.wait_until(sim_.now() + 1);
  }
  split_events_.push_back(SplitEvent{s, a1, a2, e->offset, true});

  RegistryEntry fresh;
  fresh.subhead = sh_ref;
  fresh.start_count = new_start;
  fresh.end_count = new_end;
  fresh.offset = a1;
  fresh.prev_subtail = st_ref;
  fresh.logical_id = ++logical_id_counter_;
  if (cfg_.variant == Variant::Sorted) {
    fresh.has_range = true;
    fresh.key_min = node->key_value;
    fresh.key_max = e->key_max;
  }
  registry_add(s, fresh);
  e = srv.find_entry(subhead);  // registry mutation may invalidate pointers
  e->offset = a2;
  if (cfg_.variant == Variant::Sorted) e->key_max = node->key_value;
  st->key_kind.store(uint64_t(KeyKind::SubTail));
  e->mode = RegistryEntry::Mode::Idle;
  stats_.splits++;
  return {Status::Ok, st_ref, sh_ref};
}

// ---------------------------------------------------------------------------
// Move (aborting) + Switch
// ---------------------------------------------------------------------------

bool World::move_sublist(ServerId s, const ItemRef& subhead, ServerId target) {
  if (target == s) return false;
  if (cfg_.protocol == Protocol::AM) {
    am_move(s, subhead, target);
  } else {
    tr_move(s, subhead, target);
  }
  return true;
}

void World::am_move(ServerId s, const ItemRef& subhead, ServerId target) {
  Server& srv = server(s);
  RegistryEntry* e = srv.find_entry(subhead);
  if (!e || e->mode != RegistryEntry::Mode::Idle) return;
  e->mode = RegistryEntry::Mode::Moving;

  uint64_t session = ++session_counter_;
  MoveSessionRec& rec = move_sessions_[session];
  rec.session = session;
  rec.src = s;
  rec.dst = target;
  rec.start_handle = e->start_count;
  rec.base_rows = srv.snapshot_sublist(subhead);
  rec.recording = true;
  Tick move_start = sim_.now();

  uint64_t attempt = 0;
  for (;;) {
    ++attempt;
    stats_.move_attempts++;
    e = srv.find_entry(subhead);
    Node* sh = srv.resolve(subhead);
    int64_t counter_temp =
        srv.counter(uint32_t(sh->end_count.load())).get() + e->offset;

    ItemRef remote_sh;
    ItemRef remote_prev;
    ItemRef src_subtail;
    ItemRef remote_st;

    // Stream the sublist, batching consecutive nodes per message.
    ItemRef curr_ref = subhead;
    bool done = false;
    while (!done) {
      std::vector<ItemSnapshot> batch;
      std::vector<ItemRef> sources;
      while (batch.size() < cfg_.move_batch) {
        Node* curr = srv.resolve(curr_ref);
        ItemSnapshot snap = live_snapshot(srv, curr);
        batch.push_back(snap);
        sources.push_back(curr_ref);
        if (is_subtail_kind(snap.kind)) {
          done = true;
          src_subtail = curr_ref;
          break;
        }
        curr_ref = snap.next;
      }
      Message mv;
      mv.kind = MsgKind::Move;
      mv.src = s;
      mv.dst = target;
      mv.session = session;
      mv.ref = remote_prev;
      mv.items = std::move(batch);
      mv.req_id = fresh_req();
      bool ok = false;
      Message ack = call(std::move(mv), -1, &ok);
      assert(ok);
      for (size_t i = 0; i < sources.size(); ++i) {
        Node* n = srv.resolve(sources[i]);
        n->new_location.store(pack_ref(ack.refs[i]));
      }
      if (remote_sh.is_nil()) remote_sh = ack.refs.front();
      remote_prev = ack.refs.back();
      if (done) remote_st = ack.refs.back();
    }

    if (srv.counter(uint32_t(sh->start_count.load()))
            .cas_value(counter_temp, SharedCounter::kNegInf)) {
      record_move_cas(session, s, target, subhead, remote_sh, move_start,
                      attempt);
      do_switch(s, subhead, target, remote_sh, session, attempt, move_start);
      return;
    }

    // An update slipped in: abort, scrub the partial copy, retry.
    stats_.move_aborts++;
    Message del;
    del.kind = MsgKind::DeleteMovedSublist;
    del.src = s;
    del.dst = target;
    del.session = session;
    del.ref = remote_sh;
    del.req_id = fresh_req();
    bool ok = false;
    Message ack = call(std::move(del), -1, &ok);
    assert(ok);
    abort_events_.push_back(AbortEvent{session, target, size_t(ack.value)});
  }
}

void World::handle_move_receive_am(const Message& m) {
  Server& t = server(m.dst);
  Message ack;
  ack.kind = MsgKind::MoveAck;
  ack.src = m.dst;
  ack.dst = m.src;
  ack.req_id = m.req_id;
  ItemRef prev_local = m.ref;
  for (const ItemSnapshot& item : m.items) {
    join_clock(t, item.ts);
    if (is_subhead_kind(item.kind)) {
      uint32_t hs = t.new_counter(0);
      uint32_t he = t.new_counter(0);
      ItemRef sh = t.make_sentinel(item.kind, hs, he);
      ItemRef st = t.make_sentinel(KeyKind::SubTail, hs, he);
      // The fresh subhead inherits the source identity so replicated
      // updates at the subhead can locate it.
      t.arena().raw(sh.slot).origin_sid = item.origin_sid;
      t.resolve(sh)->next.store(pack_ref(st));
      target_sessions_[m.session] = TargetSession{sh, st};
      prev_local = sh;
      ack.refs.push_back(sh);
    } else if (is_subtail_kind(item.kind)) {
      ItemRef st = target_sessions_[m.session].subtail;
      Node* stn = t.resolve(st);
      stn->key_kind.store(uint64_t(item.kind));  // preserve a moved Tail
      stn->next.store(pack_ref(item.next));
      prev_local = st;
      ack.refs.push_back(st);
    } else {
      ItemRef nn = materialize_after(t, prev_local, item);
      prev_local = nn;
      ack.refs.push_back(nn);
    }
  }
  send(std::move(ack));
}

ItemRef World::materialize_after(Server& srv, const ItemRef& prev_ref,
                                 const ItemSnapshot& item) {
  Node* prev = srv.resolve(prev_ref);
  uint32_t slot = srv.alloc_slot();
  Node& nn = srv.arena().raw(slot);
  for (;;) {
    uint64_t temp = srv.rdcss().read(&prev->next);
    nn.key_kind.init(uint64_t(item.kind));
    nn.key_value = item.key;
    nn.next.init(temp);
    nn.is_deleted.init(item.is_deleted ? 1 : 0);
    nn.start_count.init(prev->start_count.load());
    nn.end_count.init(prev->end_count.load());
    nn.new_location.init(0);
    nn.ts = item.ts;
    nn.origin_sid = item.origin_sid;
    ItemRef nref = srv.ref_of(slot);
    // Plain cas: reconstruction must append even after a tombstoned prev.
    if (prev->next.cas(temp, pack_ref(nref))) {
      lifetimes_.on_birth(nn.identity(), item.key, srv.next_seq());
      return nref;
    }
  }
}

void World::handle_delete_moved_sublist(const Message& m) {
  Server& t = server(m.dst);
  auto slots = t.sublist_slots(m.ref);
  for (uint32_t slot : slots) t.arena().release(slot);
  size_t residue = 0;
  for (uint32_t slot : slots) {
    if (t.arena().live(slot)) ++residue;
  }
  target_sessions_.erase(m.session);
  Message ack;
  ack.kind = MsgKind::MoveAck;
  ack.src = m.dst;
  ack.dst = m.src;
  ack.req_id = m.req_id;
  ack.value = residue;
  send(std::move(ack));
}

void World::record_move_cas(uint64_t session, ServerId src, ServerId dst,
                            const ItemRef& src_subhead,
                            const ItemRef& dst_subhead, Tick move_start,
                            uint64_t attempt) {
  MoveSessionRec& rec = move_sessions_[session];
  rec.recording = false;
  MoveCasEvent ev;
  ev.session = session;
  ev.src = src;
  ev.dst = dst;
  ev.move_start = move_start;
  ev.cas_tick = sim_.now();
  ev.attempt = attempt;
  ev.source_rows = server(src).snapshot_sublist(src_subhead);
  ev.target_rows = server(dst).snapshot_sublist(dst_subhead);
  ev.sublist_len = ev.source_rows.size();
  ev.rows_equal = ev.source_rows == ev.target_rows;
  ev.oracle_rows = verify::replay_oracle(rec.base_rows, rec.events);
  ev.oracle_match = ev.oracle_rows == ev.source_rows;
  move_cas_events_.push_back(std::move(ev));
}

void World::do_switch(ServerId s, const ItemRef& subhead, ServerId target,
                      const ItemRef& remote_sh, uint64_t session,
                      uint64_t attempt, Tick move_start) {
  (void)attempt;
  (void)move_start;
  Server& srv = server(s);
  RegistryEntry* e = srv.find_entry(subhead);
  e->mode = RegistryEntry::Mode::Switching;

  // 1. Point the preceding sublist's subtail at the moved copy.
  ItemRef pst = e->prev_subtail;
  if (!pst.is_nil()) {
    bool remote_repoint = pst.sid != s;
    if (!remote_repoint) {
      Node* stn = srv.resolve(pst);
      if (stn &&
          srv.counter_get(uint32_t(stn->start_count.load())) < 0) {
        pst = unpack_ref(stn->new_location.load());
        remote_repoint = true;
      } else if (stn) {
        stn->next.store(pack_ref(remote_sh));
      }
    }
    if (remote_repoint && !pst.is_nil()) {
      Message rp;
      rp.kind = MsgKind::Switch;
      rp.mode = uint8_t(SwitchMode::Repoint);
      rp.src = s;
      rp.dst = pst.sid;
      rp.ref = pst;
      rp.ref2 = remote_sh;
      rp.req_id = fresh_req();
      bool ok = false;
      call(std::move(rp), -1, &ok);
    }
  }

  // Locate this sublist's own subtail and its remote twin before the
  // ownership handoff; the follower sublist's registry needs them.
  ItemRef src_st;
  ItemRef remote_st;
  ItemRef following_sh;
  {
    auto slots = srv.sublist_slots(subhead);
    if (!slots.empty()) {
      src_st = srv.ref_of(slots.back());
      Node& stn = srv.arena().raw(slots.back());
      remote_st = unpack_ref(stn.new_location.peek());
      following_sh = unpack_ref(stn.next.peek());
    }
  }

  // 2. Ownership transfer.
  Message sw;
  sw.kind = MsgKind::Switch;
  sw.mode = uint8_t(SwitchMode::Ownership);
  sw.src = s;
  sw.dst = target;
  sw.session = session;
  sw.ref = remote_sh;
  sw.ref2 = pst;
  sw.value = e->logical_id;
  if (cfg_.variant == Variant::Sorted) {
    sw.key = 1;  // range attached
    sw.aux1 = e->key_min;
    sw.aux2 = e->key_max;
  }
  sw.req_id = fresh_req();
  Tick sent = sim_.now();
  bool ok = false;
  call(std::move(sw), -1, &ok);
  assert(ok);

  // 3. The following sublist's prev-subtail now lives on the target.
  if (!following_sh.is_nil() && !remote_st.is_nil()) {
    Message up;
    up.kind = MsgKind::Switch;
    up.mode = uint8_t(SwitchMode::UpdatePrevSubtail);
    up.src = s;
    up.dst = following_sh.sid;
    up.ref = following_sh;
    up.ref2 = remote_st;
    up.req_id = fresh_req();
    call(std::move(up), -1, &ok);
  }

  // 4. Give clients time to lose every stale ref, then reclaim.
  sim_.wait_until(sent + theta());
  registry_remove(s, subhead);
  auto slots = srv.sublist_slots(subhead);
  for (uint32_t slot : slots) {
    srv.arena().raw(slot).is_deleted.init(1);
    srv.arena().release(slot);
  }
  trace_.marker(sim_.now(), "reclaim server=" + std::to_string(s) +
                                " session=" + std::to_string(session));
  switch_events_.push_back(SwitchEvent{session, s, target, sent, sim_.now()});
  stats_.switches++;
}

void World::handle_switch(const Message& m) {
  Server& t = server(m.dst);
  Message ack;
  ack.kind = MsgKind::SwitchAck;
  ack.src = m.dst;
  ack.dst = m.src;
  ack.req_id = m.req_id;

  switch (SwitchMode(m.mode)) {
    case SwitchMode::Ownership: {
      Node* sh = t.resolve(m.ref);
      if (!sh) {
        ack.st = Status::ProtocolError;
        break;
      }
      RegistryEntry entry;
      entry.subhead = m.ref;
      entry.start_count = uint32_t(sh->start_count.peek());
      entry.end_count = uint32_t(sh->end_count.peek());
      entry.offset = 0;
      entry.prev_subtail = m.ref2;
      entry.logical_id = m.value;
      if (m.key == 1) {
        entry.has_range = true;
        entry.key_min = m.aux1;
        entry.key_max = m.aux2;
      }
      registry_add(m.dst, entry);
      target_sessions_.erase(m.session);
      break;
    }
    case SwitchMode::Repoint: {
      Node* stn = t.resolve(m.ref);
      if (stn && t.counter_get(uint32_t(stn->start_count.load())) < 0) {
        // This subtail moved as well; chase its forwarding pointer.
        ItemRef fwd = unpack_ref(stn->new_location.load());
        if (!fwd.is_nil()) {
          Message rp = m;
          rp.src = m.dst;
          rp.dst = fwd.sid;
          rp.ref = fwd;
          rp.req_id = fresh_req();
          bool ok = false;
          call(std::move(rp), -1, &ok);
        }
      } else if (stn) {
        stn->next.store(pack_ref(m.ref2));
      }
      break;
    }
    case SwitchMode::UpdatePrevSubtail: {
      RegistryEntry* e = t.find_entry(m.ref);
      if (e) e->prev_subtail = m.ref2;
      break;
    }
  }
  send(std::move(ack));
}

}  // namespace dlist
