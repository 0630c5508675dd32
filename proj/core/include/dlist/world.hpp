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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dlist/config.hpp"
#include "dlist/history.hpp"
#include "dlist/net.hpp"
#include "dlist/report.hpp"
#include "dlist/server.hpp"
#include "dlist/sim.hpp"
#include "dlist/stats.hpp"
#include "dlist/verify.hpp"

namespace dlist {

class Client;

/// Snapshots taken the instant a Move's counter CAS succeeds: the stale and
/// fresh copies must already be indistinguishable.
struct MoveCasEvent {
  uint64_t session = 0;
  ServerId src = 0;
  ServerId dst = 0;
  Tick move_start = 0;
  Tick cas_tick = 0;
  uint64_t attempt = 1;
  size_t sublist_len = 0;
  std::vector<SnapRow> source_rows;
  std::vector<SnapRow> target_rows;
  std::vector<SnapRow> oracle_rows;
  bool rows_equal = false;
  bool oracle_match = false;
};

struct SwitchEvent {
  uint64_t session = 0;
  ServerId src = 0;
  ServerId dst = 0;
  Tick switch_sent = 0;
  Tick reclaimed = 0;
};

struct SplitEvent {
  ServerId server = 0;
  int64_t a1 = 0;
  int64_t a2 = 0;
  int64_t old_offset = 0;
  bool conserved = false;
};

struct AbortEvent {
  uint64_t session = 0;
  ServerId dst = 0;
  size_t target_live_after = 0;  // session nodes left on target (want 0)
};

/// The whole simulated deployment: servers, clients, the message fabric and
/// the bookkeeping the verification suites consume.
class World {
 public:
  explicit World(const ScenarioConfig& cfg);
  ~World();

  World(const World&) = delete;
  World& operator=(const World&) = delete;

  /// Construct servers/clients and the seeded initial sublist on server 0.
  void build();

  /// Execute the configured scenario to completion. Returns steps taken.
  uint64_t run();

  /// Post-run verification + artifact files; appends to violations().
  void finish();

  Report make_report();

  // -- accessors ------------------------------------------------------------
  const ScenarioConfig& cfg() const { return cfg_; }
  Sim& sim() { return sim_; }
  SimNet& net() { return net_; }
  TraceWriter& trace() { return trace_; }
  Server& server(ServerId s) { return *servers_[s]; }
  size_t server_count() const { return servers_.size(); }
  Client& client(uint32_t i) { return *clients_[i]; }
  size_t client_count() const { return clients_.size(); }
  History& history() { return history_; }
  NodeLifetimes& lifetimes() { return lifetimes_; }
  RunStats& stats() { return stats_; }
  std::vector<std::string>& violations() { return violations_; }
  void violation(const std::string& v) { violations_.push_back(v); }

  ItemRef head_ref() const { return head_ref_; }
  ItemRef tail_ref() const { return tail_ref_; }
  Tick theta() const { return cfg_.theta(); }

  const std::vector<MoveCasEvent>& move_cas_events() const {
    return move_cas_events_;
  }
  const std::vector<SwitchEvent>& switch_events() const {
    return switch_events_;
  }
  const std::vector<SplitEvent>& split_events() const { return split_events_; }
  const std::vector<AbortEvent>& abort_events() const { return abort_events_; }
  Tick last_update_response_tick() const { return last_update_response_; }

  // -- messaging (fiber context) ---------------------------------------------
  uint64_t fresh_req() { return ++req_counter_; }
  void send(Message m);
  /// Send and block the calling fiber for the matching Response/Ack.
  /// ok=false on timeout.
  Message call(Message m, Tick timeout, bool* ok);

  // -- client-visible protocol (runs on the server owning the ref) ----------
  struct OpOutcome {
    bool delegated = false;
    ItemRef delegate_to;       // where the op went
    Status st = Status::Ok;
    ItemRef ref;               // insert result / next result
    NodeIdentity id;           // identity of ref
    // TR: replicate message to emit after the client response is sent.
    std::optional<Message> replicate_after_response;
  };

  OpOutcome update_insert(ServerId s, const ItemRef& prev, int64_t key,
                          uint64_t cause_req);
  OpOutcome update_delete(ServerId s, const ItemRef& ref, uint64_t cause_req);

  // -- transformation operations (fiber context) -----------------------------
  struct SplitResult {
    Status st = Status::Ok;
    ItemRef new_subtail;
    ItemRef new_subhead;
  };

  /// Alg. 2: dummy+subhead block, counter handoff, offset handshake.
  SplitResult split(ServerId s, const ItemRef& subhead, const ItemRef& node);

  /// Move per the configured protocol, then switch. Returns false if the
  /// sublist was busy.
  bool move_sublist(ServerId s, const ItemRef& subhead, ServerId target);

  /// Resolve the i-th registry entry of a server (script addressing).
  ItemRef subhead_by_index(ServerId s, uint32_t idx);

  /// Node at 1-based position `pos` (or the middle if pos < 0) of a sublist.
  ItemRef split_point(ServerId s, const ItemRef& subhead, int64_t pos);

  /// Wait until no client op is in flight and the network drained; then
  /// run the quiescent checks. Records a trace marker.
  void checkpoint(const std::string& label);

  void pause_clients();
  void resume_clients();
  bool clients_paused() const { return clients_paused_; }
  bool take_op_budget();
  void note_client_op_start() { ++inflight_client_ops_; }
  void note_client_op_end(Tick latency, bool update);

  int64_t pick_known_key(Rng& rng) const;
  int64_t fresh_key(uint32_t client_idx);

 private:
  // dispatch (world.cpp)
  void deliver(const Message& m);
  void handle(Message m);
  void handle_client_lookup(const Message& m);
  void handle_delegate_lookup(const Message& m);
  void handle_client_update(const Message& m);
  void handle_client_next(const Message& m);
  void handle_client_get_item(const Message& m);
  void run_next_chain(ServerId s, const ItemRef& start, const Message& origin);
  void respond(const Message& req, Message resp);

  // am.cpp
  void am_move(ServerId s, const ItemRef& subhead, ServerId target);
  void handle_move_receive_am(const Message& m);
  void handle_delete_moved_sublist(const Message& m);
  void do_switch(ServerId s, const ItemRef& subhead, ServerId target,
                 const ItemRef& remote_sh, uint64_t session, uint64_t attempt,
                 Tick move_start);
  void handle_switch(const Message& m);

  // tr.cpp
  void tr_move(ServerId s, const ItemRef& subhead, ServerId target);
  void handle_move_receive_tr(const Message& m);
  void handle_replicate_insert_after(const Message& m);
  void handle_replicate_delete(const Message& m);
  void handle_insert_replay(const Message& m);
  void handle_delete_replay(const Message& m);
  ItemRef find_by_identity(ServerId s, const ItemSnapshot& prev_item);

  // sorted.cpp
  void handle_sorted_request(const Message& m);
  void sorted_quiescent_checks();

  // shared helpers
  ItemRef materialize_after(Server& srv, const ItemRef& prev,
                            const ItemSnapshot& item);
  void record_move_cas(uint64_t session, ServerId src, ServerId dst,
                       const ItemRef& src_subhead, const ItemRef& dst_subhead,
                       Tick move_start, uint64_t attempt);
  void registry_add(ServerId s, const RegistryEntry& entry);
  void registry_remove(ServerId s, const ItemRef& subhead);
  void counter_quiescent_check(const std::string& label);

  struct MoveSessionRec {
    uint64_t session = 0;
    ServerId src = 0;
    ServerId dst = 0;
    uint32_t start_handle = 0;  // source sublist counters
    std::vector<SnapRow> base_rows;
    std::vector<verify::UpdateEvent> events;
    bool recording = false;
  };

  ScenarioConfig cfg_;
  Sim sim_;
  TraceWriter trace_;
  SimNet net_;
  History history_;
  NodeLifetimes lifetimes_;
  RunStats stats_;
  std::vector<std::unique_ptr<Server>> servers_;
  std::vector<std::unique_ptr<Client>> clients_;
  std::vector<std::string> violations_;

  ItemRef head_ref_;
  ItemRef tail_ref_;
  uint64_t req_counter_ = 0;
  uint64_t session_counter_ = 0;
  uint64_t logical_id_counter_ = 0;
  std::map<uint64_t, Message> responses_;  // req_id -> stashed reply
  std::map<uint64_t, uint64_t> response_count_;
  std::map<uint64_t, int> owner_count_;  // logical sublist id -> owners

  struct TargetSession {
    ItemRef subhead;
    ItemRef subtail;
  };

  std::vector<MoveCasEvent> move_cas_events_;
  std::vector<SwitchEvent> switch_events_;
  std::vector<SplitEvent> split_events_;
  std::vector<AbortEvent> abort_events_;
  std::map<uint64_t, MoveSessionRec> move_sessions_;
  std::map<uint64_t, TargetSession> target_sessions_;

  uint64_t ops_budget_left_ = 0;
  int inflight_client_ops_ = 0;
  bool clients_paused_ = false;
  Tick last_update_response_ = 0;
  std::vector<int64_t> known_keys_;

  friend class Client;
};

uint64_t response_key(uint64_t req_id);

}  // namespace dlist
