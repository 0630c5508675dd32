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
#include <string>
#include <vector>

#include "dlist/item.hpp"
#include "dlist/sim.hpp"
#include "dlist/types.hpp"

namespace dlist {

/// The closed set of wire events between endpoints.
enum class MsgKind : uint8_t {
  ClientLookup,
  ClientInsertAfter,
  ClientDelete,
  ClientNext,
  ClientGetItem,
  DelegateLookup,
  DelegateInsertAfter,
  DelegateDelete,
  DelegateNext,
  Move,
  MoveAck,
  Switch,
  SwitchAck,
  ReplicateInsertAfter,
  ReplicateDelete,
  InsertReplay,
  DeleteReplay,
  DeleteMovedSublist,
  Response,
};

const char* msg_kind_name(MsgKind k);

/// Switch carries three shapes distinguished by `mode`.
enum class SwitchMode : uint8_t {
  Ownership = 0,        // target adds the sublist to its registry
  Repoint = 1,          // set ref.next = ref2 (preceding subtail fix-up)
  UpdatePrevSubtail = 2 // registry entry for ref gets prev_subtail = ref2
};

struct Message {
  MsgKind kind = MsgKind::Response;
  EndpointId src = 0;
  EndpointId dst = 0;
  uint64_t msg_id = 0;    // unique per message; stamped by the net
  uint64_t req_id = 0;    // request/response correlation
  uint64_t cause_req = 0; // client request that caused this message
  uint64_t session = 0;   // move session
  EndpointId client = 0;  // reply-to endpoint for delegations

  ItemRef ref;            // primary ref argument
  ItemRef ref2;           // secondary (prev subtail, old location, ...)
  int64_t key = 0;
  std::vector<ItemSnapshot> items;  // Move batches; [prevItem, item] for
                                    // ReplicateInsertAfter; [prevItem] for
                                    // ReplicateDelete
  uint8_t mode = 0;       // SwitchMode
  bool compensating = false;

  // Response payload.
  Status st = Status::Ok;
  std::vector<ItemRef> refs;
  std::vector<NodeIdentity> ids;
  int64_t aux1 = 0;       // key range / misc
  int64_t aux2 = 0;
  uint64_t value = 0;     // logical sublist id / visit counts
};

std::string message_payload_text(const Message& m);
uint64_t fnv1a64(const std::string& s);

/// In-memory trace of sends, deliveries and world markers. Lines are the
/// determinism contract: same config + seed must reproduce them exactly.
class TraceWriter {
 public:
  void send_line(Tick tick, const Message& m);
  void deliver_line(Tick tick, const Message& m);
  void marker(Tick tick, const std::string& text);

  const std::vector<std::string>& lines() const { return lines_; }
  uint64_t digest() const;
  bool write_file(const std::string& path, const std::string& header) const;

 private:
  std::vector<std::string> lines_;
};

/// Reliable, optionally reordering message fabric over the simulator. Every
/// sent message is delivered exactly once; with reordering enabled any
/// pending due message may be chosen next, reproducibly from the seed.
class SimNet {
 public:
  struct Options {
    Tick delay_min = 1;
    Tick delay_max = 3;
    bool reorder = true;
  };

  SimNet(Sim* sim, Options opts, TraceWriter* trace);

  void set_handler(std::function<void(const Message&)> h) {
    handler_ = std::move(h);
  }

  void send(Message m);

  /// Scheduler integration: messages due now, delivery of one of them, and
  /// the earliest future due tick (-1 if none).
  size_t ready_count() const;
  void deliver_ready(size_t idx);
  Tick next_due() const;

  uint64_t sent() const { return sent_; }
  uint64_t delivered() const { return delivered_; }
  size_t in_flight() const { return queue_.size(); }

 private:
  struct InFlight {
    Tick due;
    Message msg;
  };

  Sim* sim_;
  Options opts_;
  TraceWriter* trace_;
  std::function<void(const Message&)> handler_;
  std::deque<InFlight> queue_;  // ordered by msg_id (send order)
  uint64_t next_msg_id_ = 1;
  uint64_t sent_ = 0;
  uint64_t delivered_ = 0;
};

}  // namespace dlist
