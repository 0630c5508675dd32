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

#include "dlist/world.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "dlist/client.hpp"

namespace dlist {

namespace {
constexpr uint64_t kPauseEvent = 0x70617573ull;  // clients wait here
}

uint64_t response_key(uint64_t req_id) { return (req_id << 8) | 0xA5; }

World::World(const ScenarioConfig& cfg)
    : cfg_(cfg),
      sim_(cfg.seed),
      net_(&sim_, SimNet::Options{cfg.delay_min, cfg.delay_max, cfg.reorder},
           &trace_) {}

World::~World() = default;

void World::build() {
  Server::Options sopts;
  sopts.arena_capacity = cfg_.arena_capacity;
  sopts.rdcss_capacity = cfg_.rdcss_capacity;
  sopts.ref_ttl = cfg_.ref_ttl;
  for (uint32_t s = 0; s < cfg_.servers; ++s) {
    servers_.push_back(std::make_unique<Server>(ServerId(s), sopts, &sim_,
                                                &lifetimes_, &stats_));
    ServerId sid = s;
    servers_.back()->set_update_hook([this, sid](
                                         const Server::UpdateHookEvent& ev) {
      for (auto& [id, rec] : move_sessions_) {
        if (!rec.recording || rec.src != sid ||
            rec.start_handle != ev.start_handle) {
          continue;
        }
        verify::UpdateEvent ue;
        ue.kind = ev.is_insert ? verify::UpdateEvent::Kind::Insert
                               : verify::UpdateEvent::Kind::Delete;
        ue.prev = ev.prev;
        ue.node = ev.node;
        ue.key = ev.key;
        ue.seq = ev.seq;
        rec.events.push_back(ue);
      }
    });
  }

  net_.set_handler([this](const Message& m) { deliver(m); });
  sim_.set_external([this] { return net_.ready_count(); },
                    [this](size_t i) { net_.deliver_ready(i); },
                    [this] { return net_.next_due(); });

  // Initial sublist on server 0: Head sentinel, seeded keys, Tail sentinel.
  Server& s0 = *servers_[0];
  uint32_t hs = s0.new_counter(0);
  uint32_t he = s0.new_counter(0);
  head_ref_ = s0.make_sentinel(KeyKind::Head, hs, he);
  tail_ref_ = s0.make_sentinel(KeyKind::Tail, hs, he);

  Node* prev = s0.resolve(head_ref_);
  ItemRef prev_ref = head_ref_;
  for (uint32_t i = 1; i <= cfg_.initial_keys; ++i) {
    int64_t key = (cfg_.variant == Variant::Sorted)
                      ? int64_t(i) * (cfg_.key_domain / (cfg_.initial_keys + 1))
                      : int64_t(i);
    uint32_t slot = s0.alloc_slot();
    Node& n = s0.arena().raw(slot);
    n.key_kind.init(uint64_t(KeyKind::App));
    n.key_value = key;
    n.is_deleted.init(0);
    n.start_count.init(hs);
    n.end_count.init(he);
    n.new_location.init(0);
    n.ts = s0.logical_clock().peek() + 1;
    s0.logical_clock().reset(n.ts);
    n.origin_sid = 0;
    ItemRef r = s0.ref_of(slot);
    prev->next.init(pack_ref(r));
    lifetimes_.on_birth(n.identity(), key, 0);
    known_keys_.push_back(key);
    prev = &n;
    prev_ref = r;
  }
  prev->next.init(pack_ref(tail_ref_));

  RegistryEntry entry;
  entry.subhead = head_ref_;
  entry.start_count = hs;
  entry.end_count = he;
  entry.offset = 0;
  entry.prev_subtail = kNilRef;
  entry.logical_id = ++logical_id_counter_;
  if (cfg_.variant == Variant::Sorted) {
    entry.has_range = true;
    entry.key_min = 0;  // keys live in (0, domain]
    entry.key_max = cfg_.key_domain;
  }
  registry_add(0, entry);

  for (uint32_t c = 0; c < cfg_.clients; ++c) {
    clients_.push_back(std::make_unique<Client>(
        this, c, EndpointId(cfg_.servers + c), cfg_.seed * 1000003ull + c));
  }
  ops_budget_left_ = cfg_.steps;
}

void World::registry_add(ServerId s, const RegistryEntry& entry) {
  servers_[s]->registry()[pack_ref(entry.subhead)] = entry;
  int& owners = owner_count_[entry.logical_id];
  owners += 1;
  if (owners > 2) {
    violation("sublist " + std::to_string(entry.logical_id) +
              " owned by more than two registries");
  }
}

void World::registry_remove(ServerId s, const ItemRef& subhead) {
  auto& reg = servers_[s]->registry();
  auto it = reg.find(pack_ref(subhead));
  if (it == reg.end()) return;
  uint64_t logical = it->second.logical_id;
  reg.erase(it);
  int& owners = owner_count_[logical];
  owners -= 1;
  if (owners < 1) {
    violation("sublist " + std::to_string(logical) + " lost all owners");
  }
}

void World::send(Message m) {
  if (m.req_id != 0 &&
      (m.kind == MsgKind::ClientLookup || m.kind == MsgKind::ClientInsertAfter ||
       m.kind == MsgKind::ClientDelete || m.kind == MsgKind::ClientNext ||
       m.kind == MsgKind::ClientGetItem || m.kind == MsgKind::DelegateLookup ||
       m.kind == MsgKind::Move || m.kind == MsgKind::Switch ||
       m.kind == MsgKind::DeleteMovedSublist)) {
    stats_.requests++;
  }
  net_.send(std::move(m));
}

Message World::call(Message m, Tick timeout, bool* ok) {
  if (m.req_id == 0) m.req_id = fresh_req();
  uint64_t key = response_key(m.req_id);
  send(m);
  Tick deadline = timeout < 0 ? -1 : sim_.now() + timeout;
  bool got = sim_.wait_event(key, deadline);
  if (ok) *ok = got;
  if (!got) {
    stats_.response_timeouts++;
    return Message{};
  }
  auto it = responses_.find(m.req_id);
  assert(it != responses_.end());
  Message r = it->second;
  responses_.erase(it);
  return r;
}

void World::deliver(const Message& m) {
  switch (m.kind) {
    case MsgKind::Response:
    case MsgKind::MoveAck:
    case MsgKind::SwitchAck: {
      stats_.responses++;
      response_count_[m.req_id]++;
      responses_[m.req_id] = m;
      sim_.notify_event(response_key(m.req_id));
      return;
    }
    default:
      break;
  }
  Message copy = m;
  size_t stack = 128 * 1024;
  sim_.spawn(msg_kind_name(m.kind), [this, copy] { handle(copy); }, stack);
}

void World::handle(Message m) {
  bool sorted = cfg_.variant == Variant::Sorted;
  switch (m.kind) {
    case MsgKind::ClientLookup:
      if (sorted) return handle_sorted_request(m);
      return handle_client_lookup(m);
    case MsgKind::ClientInsertAfter:
    case MsgKind::ClientDelete:
      if (sorted) return handle_sorted_request(m);
      return handle_client_update(m);
    case MsgKind::DelegateInsertAfter:
    case MsgKind::DelegateDelete:
      if (sorted) return handle_sorted_request(m);
      return handle_client_update(m);
    case MsgKind::ClientNext:
    case MsgKind::DelegateNext:
      return handle_client_next(m);
    case MsgKind::ClientGetItem:
      return handle_client_get_item(m);
    case MsgKind::DelegateLookup:
      return handle_delegate_lookup(m);
    case MsgKind::Move:
      return cfg_.protocol == Protocol::AM ? handle_move_receive_am(m)
                                           : handle_move_receive_tr(m);
    case MsgKind::Switch:
      return handle_switch(m);
    case MsgKind::ReplicateInsertAfter:
      return handle_replicate_insert_after(m);
    case MsgKind::ReplicateDelete:
      return handle_replicate_delete(m);
    case MsgKind::InsertReplay:
      return handle_insert_replay(m);
    case MsgKind::DeleteReplay:
      return handle_delete_replay(m);
    case MsgKind::DeleteMovedSublist:
      return handle_delete_moved_sublist(m);
    default:
      violation("unhandled message kind");
  }
}

// Every request message carries `client` = the endpoint owed the terminal
// Response, so delegation chains reply straight to the right place.
void World::respond(const Message& req, Message resp) {
  resp.kind = MsgKind::Response;
  resp.src = req.dst;
  resp.dst = req.client;
  resp.req_id = req.req_id;
  resp.cause_req = req.cause_req;
  send(std::move(resp));
}

void World::handle_client_lookup(const Message& m) {
  Server& srv = server(m.dst);
  std::vector<ItemRef> heads;
  for (auto& [packed, entry] : srv.registry()) heads.push_back(entry.subhead);

  Message resp;
  for (const ItemRef& head : heads) {
    auto out = srv.lookup_sublist(head, m.key);
    if (out.delegate) {
      if (out.delegate_to.is_nil()) continue;
      Message d;
      d.kind = MsgKind::DelegateLookup;
      d.src = m.dst;
      d.dst = out.delegate_to.sid;
      d.client = m.dst;  // the delegate replies to this server for merging
      d.ref = out.delegate_to;
      d.key = m.key;
      d.req_id = fresh_req();
      d.cause_req = m.req_id;
      stats_.delegated_lookup++;
      bool ok = false;
      Message r = call(std::move(d), cfg_.request_timeout, &ok);
      if (ok) {
        for (size_t i = 0; i < r.refs.size(); ++i) {
          resp.refs.push_back(r.refs[i]);
          resp.ids.push_back(r.ids[i]);
        }
      }
    } else {
      for (auto& h : out.hits) {
        resp.refs.push_back(srv.leased(h.ref));
        resp.ids.push_back(h.id);
      }
    }
  }
  resp.st = resp.refs.empty() ? Status::NotFound : Status::Ok;
  respond(m, std::move(resp));
}

void World::handle_delegate_lookup(const Message& m) {
  Server& srv = server(m.dst);
  auto out = srv.lookup_sublist(m.ref, m.key);
  Message resp;
  if (out.delegate && !out.delegate_to.is_nil()) {
    Message d = m;
    d.src = m.dst;
    d.dst = out.delegate_to.sid;
    d.client = m.dst;
    d.ref = out.delegate_to;
    d.req_id = fresh_req();
    stats_.delegated_lookup++;
    bool ok = false;
    Message r = call(std::move(d), cfg_.request_timeout, &ok);
    if (ok) {
      resp.refs = r.refs;
      resp.ids = r.ids;
    }
  } else {
    for (auto& h : out.hits) {
      resp.refs.push_back(srv.leased(h.ref));
      resp.ids.push_back(h.id);
    }
  }
  resp.st = resp.refs.empty() ? Status::NotFound : Status::Ok;
  respond(m, std::move(resp));
}

void World::handle_client_update(const Message& m) {
  bool is_insert = m.kind == MsgKind::ClientInsertAfter ||
                   m.kind == MsgKind::DelegateInsertAfter;
  OpOutcome o = is_insert
                    ? update_insert(m.dst, m.ref, m.key, m.cause_req)
                    : update_delete(m.dst, m.ref, m.cause_req);
  if (o.delegated) {
    if (o.delegate_to.is_nil()) {
      Message resp;
      resp.st = Status::UnknownRef;
      respond(m, std::move(resp));
      return;
    }
    Message d = m;
    d.kind = is_insert ? MsgKind::DelegateInsertAfter : MsgKind::DelegateDelete;
    d.src = m.dst;
    d.dst = o.delegate_to.sid;
    d.ref = o.delegate_to;
    if (is_insert) stats_.delegated_insert++;
    else stats_.delegated_delete++;
    send(std::move(d));
    return;
  }
  Message resp;
  resp.st = o.st;
  if (is_insert && o.st == Status::Ok) {
    resp.refs.push_back(server(m.dst).leased(o.ref));
    resp.ids.push_back(o.id);
  }
  last_update_response_ = sim_.now();
  respond(m, std::move(resp));
  if (o.replicate_after_response.has_value()) {
    send(*o.replicate_after_response);
  }
}

void World::handle_client_next(const Message& m) {
  run_next_chain(m.dst, m.ref, m);
}

void World::run_next_chain(ServerId s, const ItemRef& start,
                           const Message& origin) {
  Server& srv = server(s);
  auto out = srv.next_from(start);
  using K = Server::NextOutcome::Kind;
  switch (out.kind) {
    case K::Local:
    case K::End: {
      Message resp;
      Node* n = srv.resolve(out.ref);
      if (!n) {
        resp.st = Status::UnknownRef;
      } else {
        resp.st = Status::Ok;
        resp.refs.push_back(srv.leased(out.ref));
        resp.ids.push_back(n->identity());
        resp.aux1 = n->key_value;
      }
      respond(origin, std::move(resp));
      return;
    }
    case K::DelegateMoved:
    case K::DelegateBoundary: {
      if (out.ref.is_nil()) {
        Message resp;
        resp.st = Status::UnknownRef;
        respond(origin, std::move(resp));
        return;
      }
      Message d = origin;
      d.kind = MsgKind::DelegateNext;
      d.src = s;
      d.dst = out.ref.sid;
      d.ref = out.ref;
      stats_.delegated_next++;
      send(std::move(d));
      return;
    }
    case K::Unknown: {
      Message resp;
      resp.st = Status::UnknownRef;
      respond(origin, std::move(resp));
      return;
    }
  }
}

void World::handle_client_get_item(const Message& m) {
  Server& srv = server(m.dst);
  auto r = srv.get_item(m.ref);
  Message resp;
  resp.st = r.st;
  if (r.st == Status::Ok) {
    resp.refs.push_back(r.ref);
    resp.ids.push_back(r.item.identity());
    resp.aux1 = r.item.key;
    resp.aux2 = r.item.is_deleted ? 1 : 0;
  }
  respond(m, std::move(resp));
}

ItemRef World::subhead_by_index(ServerId s, uint32_t idx) {
  uint32_t i = 0;
  for (auto& [packed, entry] : server(s).registry()) {
    if (i++ == idx) return entry.subhead;
  }
  return kNilRef;
}

ItemRef World::split_point(ServerId s, const ItemRef& subhead, int64_t pos) {
  auto slots = server(s).sublist_slots(subhead);
  // Application nodes sit strictly between the sentinels.
  std::vector<uint32_t> app;
  for (uint32_t slot : slots) {
    Node& n = server(s).arena().raw(slot);
    if (n.kind_peek() == KeyKind::App && n.is_deleted.peek() == 0)
      app.push_back(slot);
  }
  if (app.empty()) return kNilRef;
  size_t at = pos < 0 ? app.size() / 2 : std::min(size_t(pos), app.size() - 1);
  return server(s).ref_of(app[at]);
}

bool World::take_op_budget() {
  if (ops_budget_left_ == 0) return false;
  --ops_budget_left_;
  return true;
}

void World::note_client_op_end(Tick latency, bool update) {
  --inflight_client_ops_;
  stats_.latency_total += latency;
  stats_.latency_samples++;
  if (update) last_update_response_ = sim_.now();
}

void World::pause_clients() { clients_paused_ = true; }

void World::resume_clients() {
  clients_paused_ = false;
  sim_.notify_event(kPauseEvent);
}

int64_t World::pick_known_key(Rng& rng) const {
  if (known_keys_.empty()) return 1;
  return known_keys_[rng.below(known_keys_.size())];
}

int64_t World::fresh_key(uint32_t client_idx) {
  static_assert(sizeof(int64_t) == 8);
  int64_t k = int64_t(1000 + known_keys_.size() * cfg_.clients + client_idx);
  known_keys_.push_back(k);
  return k;
}

void World::counter_quiescent_check(const std::string& label) {
  for (auto& s : servers_) {
    auto v = verify::check_counter_invariant(*s);
    if (!v.ok) violation("counter identity (" + label + "): " + v.detail);
  }
}

void World::checkpoint(const std::string& label) {
  bool was_paused = clients_paused_;
  pause_clients();
  while (inflight_client_ops_ > 0 || net_.in_flight() > 0) {
    sim_.wait_until(sim_.now() + 1);
  }
  counter_quiescent_check(label);
  if (cfg_.variant == Variant::Sorted) sorted_quiescent_checks();
  trace_.marker(sim_.now(), "checkpoint " + label);
  if (!was_paused) resume_clients();
}

uint64_t World::run() {
  for (auto& c : clients_) {
    Client* cp = c.get();
    sim_.spawn("client" + std::to_string(cp->index()),
               [cp] { cp->workload(); });
  }

  sim_.spawn("script", [this] {
    auto script = cfg_.script;
    std::stable_sort(script.begin(), script.end(),
                     [](const ScriptCmd& a, const ScriptCmd& b) {
                       return a.at < b.at;
                     });
    for (const auto& cmd : script) {
      if (sim_.now() < cmd.at) sim_.wait_until(cmd.at);
      switch (cmd.kind) {
        case ScriptCmd::Kind::Split: {
          ItemRef sh = subhead_by_index(cmd.server, cmd.sublist);
          if (sh.is_nil()) break;
          ItemRef at = split_point(cmd.server, sh, cmd.pos);
          if (at.is_nil()) break;
          ScriptCmd c = cmd;
          ItemRef at_ref = at;
          sim_.spawn("split", [this, c, sh, at_ref] {
            split(c.server, sh, at_ref);
          });
          break;
        }
        case ScriptCmd::Kind::Move: {
          ItemRef sh = subhead_by_index(cmd.server, cmd.sublist);
          if (sh.is_nil()) break;
          ScriptCmd c = cmd;
          sim_.spawn(
              "move",
              [this, c, sh] { move_sublist(c.server, sh, c.target); },
              2 * 1024 * 1024);
          break;
        }
        case ScriptCmd::Kind::Checkpoint:
          checkpoint("script@" + std::to_string(cmd.at));
          break;
        case ScriptCmd::Kind::PauseClients:
          pause_clients();
          break;
        case ScriptCmd::Kind::ResumeClients:
          resume_clients();
          break;
        case ScriptCmd::Kind::Delink: {
          auto n = server(cmd.server).delink_pass(sim_.now() + theta());
          if (!n.has_value()) {
            trace_.marker(sim_.now(), "delink busy");
          }
          break;
        }
      }
    }
  });

  if (cfg_.auto_split) {
    for (uint32_t s = 0; s < cfg_.servers; ++s) {
      sim_.spawn("split_policy" + std::to_string(s), [this, s] {
        for (;;) {
          sim_.wait_until(sim_.now() + 50);
          if (ops_budget_left_ == 0 && inflight_client_ops_ == 0) return;
          std::vector<ItemRef> heads;
          for (auto& [p, e] : server(s).registry()) {
            if (e.mode == RegistryEntry::Mode::Idle) heads.push_back(e.subhead);
          }
          for (const ItemRef& h : heads) {
            if (server(s).sublist_length(h) > cfg_.split_threshold) {
              ItemRef at = split_point(s, h, -1);
              if (!at.is_nil()) split(s, h, at);
            }
          }
        }
      });
    }
  }

  uint64_t steps = sim_.run(cfg_.max_steps);
  if (sim_.exhausted()) violation("scheduler step budget exhausted");
  if (sim_.stuck_on_event()) violation("fibers stuck waiting on events");
  return steps;
}

void World::finish() {
  // Arena sweeps so quarantined delink slots with elapsed grace get bumped.
  for (auto& s : servers_) s->arena().sweep(sim_.now());

  if (net_.in_flight() != 0) {
    violation("network has undelivered messages at shutdown");
  }
  for (const auto& [req, n] : response_count_) {
    if (n != 1) {
      violation("request " + std::to_string(req) + " answered " +
                std::to_string(n) + " times");
    }
  }
  counter_quiescent_check("final");
  if (cfg_.variant == Variant::Sorted) sorted_quiescent_checks();

  for (const auto& ev : move_cas_events_) {
    if (!ev.rows_equal) {
      violation("move session " + std::to_string(ev.session) +
                ": source/target differ at CAS instant");
    }
    if (!ev.oracle_match) {
      violation("move session " + std::to_string(ev.session) +
                ": reconstruction differs from replay oracle");
    }
  }
  for (auto& s : servers_) {
    if (s->arena().stale_hits() != 0) {
      violation("server " + std::to_string(s->sid()) +
                " observed stale-generation dereferences");
    }
  }

  if (cfg_.verify_enabled("lookup")) {
    auto v = verify::check_lookup_property(history_, lifetimes_);
    if (!v.ok) violation("lookup property: " + v.detail);
  }

  if (!cfg_.trace_out.empty()) {
    std::string header = "# dlist trace v1\n" + cfg_.to_text() + "---\n";
    trace_.write_file(cfg_.trace_out, header);
  }
  if (!cfg_.history_out.empty()) {
    std::string header = "# dlist history v1\n";
    history_.write_file(cfg_.history_out, header);
  }
}

Report World::make_report() {
  Report r;
  r.stats = stats_;
  r.violations = violations_;
  r.trace_digest = trace_.digest();
  r.trace_path = cfg_.trace_out;
  r.history_path = cfg_.history_out;
  r.end_tick = sim_.now();
  r.sim_steps = sim_.steps_taken();
  r.checks.push_back(std::string("lookup_property = ") +
                     (cfg_.verify_enabled("lookup") ? "ran" : "skipped"));
  return r;
}

}  // namespace dlist
