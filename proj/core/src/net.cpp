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

#include "dlist/net.hpp"

#include <cassert>
#include <cstdio>
#include <sstream>

namespace dlist {

const char* msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::ClientLookup: return "client_lookup";
    case MsgKind::ClientInsertAfter: return "client_insert_after";
    case MsgKind::ClientDelete: return "client_delete";
    case MsgKind::ClientNext: return "client_next";
    case MsgKind::ClientGetItem: return "client_get_item";
    case MsgKind::DelegateLookup: return "delegate_lookup";
    case MsgKind::DelegateInsertAfter: return "delegate_insert_after";
    case MsgKind::DelegateDelete: return "delegate_delete";
    case MsgKind::DelegateNext: return "delegate_next";
    case MsgKind::Move: return "move";
    case MsgKind::MoveAck: return "move_ack";
    case MsgKind::Switch: return "switch";
    case MsgKind::SwitchAck: return "switch_ack";
    case MsgKind::ReplicateInsertAfter: return "replicate_insert_after";
    case MsgKind::ReplicateDelete: return "replicate_delete";
    case MsgKind::InsertReplay: return "insert_replay";
    case MsgKind::DeleteReplay: return "delete_replay";
    case MsgKind::DeleteMovedSublist: return "delete_moved_sublist";
    case MsgKind::Response: return "response";
  }
  return "?";
}

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

void snapshot_text(std::ostringstream& out, const ItemSnapshot& it) {
  out << key_kind_name(it.kind) << ":" << it.key << ":" << (it.is_deleted ? 1 : 0)
      << ":" << ref_to_string(it.next) << ":" << ref_to_string(it.new_location)
      << ":" << it.ts << ":" << it.origin_sid;
}

}  // namespace

std::string message_payload_text(const Message& m) {
  std::ostringstream out;
  out << msg_kind_name(m.kind) << " req=" << m.req_id << " cause=" << m.cause_req
      << " sess=" << m.session << " client=" << m.client
      << " ref=" << ref_to_string(m.ref) << " ref2=" << ref_to_string(m.ref2)
      << " key=" << m.key << " mode=" << int(m.mode)
      << " comp=" << (m.compensating ? 1 : 0) << " st=" << status_name(m.st)
      << " aux=" << m.aux1 << "," << m.aux2 << " val=" << m.value;
  for (const auto& it : m.items) {
    out << " item[";
    snapshot_text(out, it);
    out << "]";
  }
  for (const auto& r : m.refs) out << " r:" << ref_to_string(r);
  for (const auto& id : m.ids) out << " id:" << id.origin_sid << "/" << id.ts;
  return out.str();
}

void TraceWriter::send_line(Tick tick, const Message& m) {
  char head[128];
  std::snprintf(head, sizeof(head), "S %lld %s %u %u %llu ", (long long)tick,
                msg_kind_name(m.kind), m.src, m.dst,
                (unsigned long long)m.msg_id);
  uint64_t digest = fnv1a64(message_payload_text(m));
  char tail[32];
  std::snprintf(tail, sizeof(tail), "%016llx", (unsigned long long)digest);
  lines_.push_back(std::string(head) + tail);
}

void TraceWriter::deliver_line(Tick tick, const Message& m) {
  char head[128];
  std::snprintf(head, sizeof(head), "D %lld %s %u %u %llu ", (long long)tick,
                msg_kind_name(m.kind), m.src, m.dst,
                (unsigned long long)m.msg_id);
  uint64_t digest = fnv1a64(message_payload_text(m));
  char tail[32];
  std::snprintf(tail, sizeof(tail), "%016llx", (unsigned long long)digest);
  lines_.push_back(std::string(head) + tail);
}

void TraceWriter::marker(Tick tick, const std::string& text) {
  char head[64];
  std::snprintf(head, sizeof(head), "M %lld ", (long long)tick);
  lines_.push_back(std::string(head) + text);
}

uint64_t TraceWriter::digest() const {
  uint64_t h = 1469598103934665603ull;
  for (const auto& l : lines_) {
    for (unsigned char c : l) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= '\n';
    h *= 1099511628211ull;
  }
  return h;
}

bool TraceWriter::write_file(const std::string& path,
                             const std::string& header) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) return false;
  std::fprintf(f, "%s", header.c_str());
  for (const auto& l : lines_) std::fprintf(f, "%s\n", l.c_str());
  std::fprintf(f, "digest %016llx\n", (unsigned long long)digest());
  std::fclose(f);
  return true;
}

SimNet::SimNet(Sim* sim, Options opts, TraceWriter* trace)
    : sim_(sim), opts_(opts), trace_(trace) {}

void SimNet::send(Message m) {
  m.msg_id = next_msg_id_++;
  Tick delay = opts_.delay_min;
  if (opts_.reorder && opts_.delay_max > opts_.delay_min) {
    delay = opts_.delay_min +
            Tick(sim_->rng().below(uint64_t(opts_.delay_max - opts_.delay_min + 1)));
  }
  InFlight f{sim_->now() + delay, m};
  if (trace_) trace_->send_line(sim_->now(), m);
  queue_.push_back(f);
  ++sent_;
}

size_t SimNet::ready_count() const {
  Tick now = sim_->now();
  if (!opts_.reorder) {
    // FIFO: only the oldest message is eligible, and only once due.
    return (!queue_.empty() && queue_.front().due <= now) ? 1 : 0;
  }
  size_t n = 0;
  for (const auto& f : queue_) {
    if (f.due <= now) ++n;
  }
  return n;
}

void SimNet::deliver_ready(size_t idx) {
  Tick now = sim_->now();
  size_t seen = 0;
  for (size_t i = 0; i < queue_.size(); ++i) {
    if (queue_[i].due > now) continue;
    if (seen++ != idx) continue;
    Message m = queue_[i].msg;
    queue_.erase(queue_.begin() + i);
    ++delivered_;
    if (trace_) trace_->deliver_line(now, m);
    handler_(m);
    return;
  }
  assert(false && "deliver_ready index out of range");
}

Tick SimNet::next_due() const {
  if (queue_.empty()) return -1;
  if (!opts_.reorder) return queue_.front().due;
  Tick best = queue_.front().due;
  for (const auto& f : queue_) best = std::min(best, f.due);
  return best;
}

}  // namespace dlist
