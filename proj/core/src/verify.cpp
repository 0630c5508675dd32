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

#include "dlist/verify.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

namespace dlist {
namespace verify {

SeqListModel::SeqListModel(const LinFixture& fixture) {
  MNode sh;
  sh.sentinel = true;
  nodes_.push_back(sh);
  order_.push_back(0);
  bind(fixture.subhead, 0);
  for (const auto& [ref, key] : fixture.nodes) {
    MNode n;
    n.key = key;
    int id = int(nodes_.size());
    nodes_.push_back(n);
    order_.push_back(id);
    bind(ref, id);
  }
  MNode st;
  st.sentinel = true;
  st.subtail = true;
  int st_id = int(nodes_.size());
  nodes_.push_back(st);
  order_.push_back(st_id);
  bind(fixture.subtail, st_id);
}

int SeqListModel::resolve(const ItemRef& r) const {
  auto it = binding_.find(pack_ref(r));
  return it == binding_.end() ? -1 : it->second;
}

bool SeqListModel::bind(const ItemRef& r, int id) {
  auto [it, fresh] = binding_.emplace(pack_ref(r), id);
  return fresh;
}

bool SeqListModel::apply(const HistEvent& inv, const HistEvent& resp) {
  switch (inv.op) {
    case OpKind::InsertAfter: {
      int prev = resolve(inv.arg_ref);
      if (prev < 0) return false;
      const MNode& p = nodes_[prev];
      if (p.subtail) return resp.st == Status::SentinelTarget;
      if (p.deleted) return resp.st == Status::NotFound;
      if (resp.st != Status::Ok || resp.result_refs.empty()) return false;
      MNode n;
      n.key = inv.arg_key;
      int id = int(nodes_.size());
      nodes_.push_back(n);
      auto pos = std::find(order_.begin(), order_.end(), prev);
      order_.insert(pos + 1, id);
      return bind(resp.result_refs[0], id);
    }
    case OpKind::Delete: {
      int id = resolve(inv.arg_ref);
      if (id < 0) return false;
      MNode& n = nodes_[id];
      if (n.sentinel) return resp.st == Status::SentinelTarget;
      if (n.deleted) return resp.st == Status::NotFound;
      if (resp.st != Status::Ok) return false;
      n.deleted = true;
      return true;
    }
    case OpKind::Next: {
      int id = resolve(inv.arg_ref);
      if (id < 0) return false;
      auto pos = std::find(order_.begin(), order_.end(), id);
      assert(pos != order_.end());
      for (auto it = pos + 1; it != order_.end(); ++it) {
        const MNode& n = nodes_[*it];
        if (n.subtail) break;
        if (n.sentinel || n.deleted) continue;
        // First live successor; the response must name exactly it.
        if (resp.st != Status::Ok || resp.result_refs.empty()) return false;
        return resolve(resp.result_refs[0]) == *it;
      }
      // Ran to the end: the subtail ref is the answer.
      if (resp.st != Status::Ok || resp.result_refs.empty()) return false;
      return resolve(resp.result_refs[0]) == order_.back();
    }
    default:
      return false;  // lookups are excluded from the linearizability check
  }
}

namespace {

struct OpRec {
  const HistEvent* inv = nullptr;
  const HistEvent* resp = nullptr;
};

bool dfs(const std::vector<OpRec>& ops, std::vector<bool>& done, size_t left,
         const SeqListModel& model) {
  if (left == 0) return true;
  // Earliest respond among pending ops bounds which may linearize next.
  uint64_t min_resp = UINT64_MAX;
  for (size_t i = 0; i < ops.size(); ++i) {
    if (!done[i]) min_resp = std::min(min_resp, ops[i].resp->seq);
  }
  for (size_t i = 0; i < ops.size(); ++i) {
    if (done[i]) continue;
    if (ops[i].inv->seq > min_resp) continue;  // a pending op precedes it
    SeqListModel next = model;
    if (!next.apply(*ops[i].inv, *ops[i].resp)) continue;
    done[i] = true;
    if (dfs(ops, done, left - 1, next)) return true;
    done[i] = false;
  }
  return false;
}

}  // namespace

Verdict check_linearizable(const std::vector<HistEvent>& events,
                           const LinFixture& fixture, size_t max_ops) {
  std::map<uint64_t, OpRec> by_id;
  for (const auto& e : events) {
    if (e.invoke) by_id[e.op_id].inv = &e;
    else by_id[e.op_id].resp = &e;
  }
  std::vector<OpRec> ops;
  for (auto& [id, rec] : by_id) {
    if (!rec.inv || !rec.resp) {
      return {false, "dangling invoke/respond for op " + std::to_string(id)};
    }
    ops.push_back(rec);
  }
  if (ops.size() > max_ops) {
    return {false, "history exceeds checker size limit"};
  }
  std::vector<bool> done(ops.size(), false);
  SeqListModel model(fixture);
  if (dfs(ops, done, ops.size(), model)) return {true, ""};
  return {false, "no sequential witness found"};
}

Verdict check_lookup_property(const History& history,
                              const NodeLifetimes& lifetimes) {
  std::map<uint64_t, const HistEvent*> invokes;
  for (const auto& e : history.events()) {
    if (e.invoke) invokes[e.op_id] = &e;
  }
  for (const auto& e : history.events()) {
    if (e.invoke) continue;
    const HistEvent* inv = invokes.count(e.op_id) ? invokes[e.op_id] : nullptr;
    if (!inv) continue;
    bool is_lookup =
        inv->op == OpKind::Lookup || inv->op == OpKind::SortedSearch;
    if (!is_lookup) continue;
    std::set<NodeIdentity> got(e.result_ids.begin(), e.result_ids.end());
    for (const auto& [id, w] : lifetimes.windows()) {
      if (w.key != inv->arg_key) continue;
      if (w.birth < inv->seq && w.death > e.seq) {
        if (!got.count(id)) {
          std::ostringstream msg;
          msg << "lookup(" << inv->arg_key << ") op " << inv->op_id
              << " missed instance (s" << id.origin_sid << ",ts" << id.ts
              << ") alive for the whole call";
          return {false, msg.str()};
        }
      }
    }
  }
  return {true, ""};
}

std::vector<SnapRow> replay_oracle(const std::vector<SnapRow>& base,
                                   const std::vector<UpdateEvent>& events) {
  std::vector<SnapRow> rows = base;
  auto find_row = [&rows](const NodeIdentity& id) -> int {
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].origin_sid == id.origin_sid && rows[i].ts == id.ts)
        return int(i);
    }
    return -1;
  };
  for (const auto& ev : events) {
    if (ev.kind == UpdateEvent::Kind::Insert) {
      SnapRow r{ev.key, ev.node.ts, ev.node.origin_sid, false};
      if (ev.prev.ts == 0) {
        rows.insert(rows.begin(), r);
      } else {
        int at = find_row(ev.prev);
        assert(at >= 0 && "oracle event at unknown prev");
        rows.insert(rows.begin() + at + 1, r);
      }
    } else {
      int at = find_row(ev.node);
      if (at >= 0) rows[at].is_deleted = true;
    }
  }
  return rows;
}

Verdict check_counter_invariant(Server& server) {
  for (auto& [packed, entry] : server.registry()) {
    if (entry.start_count == 0) continue;
    int64_t start = server.counter(entry.start_count).peek();
    if (start <= SharedCounter::kNegInf / 2) continue;  // retired
    int64_t end = server.counter(entry.end_count).peek();
    if (start - end != entry.offset) {
      std::ostringstream msg;
      msg << "server " << server.sid() << " sublist "
          << ref_to_string(entry.subhead) << ": startCount(" << start
          << ") - endCount(" << end << ") != offset(" << entry.offset << ")";
      return {false, msg.str()};
    }
  }
  return {true, ""};
}

std::string rows_to_string(const std::vector<SnapRow>& rows) {
  std::ostringstream out;
  for (const auto& r : rows) {
    out << "(" << r.key << ",ts" << r.ts << ",s" << r.origin_sid
        << (r.is_deleted ? ",del" : "") << ") ";
  }
  return out.str();
}

}  // namespace verify
}  // namespace dlist
