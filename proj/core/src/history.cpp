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

#include "dlist/history.hpp"

#include <cstdio>

namespace dlist {

const char* op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::InsertAfter: return "insert_after";
    case OpKind::Delete: return "delete";
    case OpKind::Next: return "next";
    case OpKind::Lookup: return "lookup";
    case OpKind::GetItem: return "get_item";
    case OpKind::SortedInsert: return "sorted_insert";
    case OpKind::SortedDelete: return "sorted_delete";
    case OpKind::SortedSearch: return "sorted_search";
  }
  return "?";
}

uint64_t History::record_invoke(uint64_t seq, Tick tick, uint32_t worker,
                                OpKind op, const ItemRef& arg_ref,
                                int64_t arg_key) {
  HistEvent e;
  e.seq = seq;
  e.tick = tick;
  e.worker = worker;
  e.invoke = true;
  e.op_id = next_op_id_++;
  e.op = op;
  e.arg_ref = arg_ref;
  e.arg_key = arg_key;
  events_.push_back(e);
  return e.op_id;
}

void History::record_respond(uint64_t seq, Tick tick, uint32_t worker,
                             uint64_t op_id, Status st,
                             std::vector<ItemRef> refs,
                             std::vector<NodeIdentity> ids) {
  HistEvent e;
  e.seq = seq;
  e.tick = tick;
  e.worker = worker;
  e.invoke = false;
  e.op_id = op_id;
  e.st = st;
  e.result_refs = std::move(refs);
  e.result_ids = std::move(ids);
  events_.push_back(e);
}

void History::clear() {
  events_.clear();
  next_op_id_ = 0;
}

bool History::write_file(const std::string& path,
                         const std::string& header) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) return false;
  std::fprintf(f, "%s", header.c_str());
  for (const auto& e : events_) {
    if (e.invoke) {
      std::fprintf(f, "E %llu %lld %u invoke %llu %s %s %lld\n",
                   (unsigned long long)e.seq, (long long)e.tick, e.worker,
                   (unsigned long long)e.op_id, op_kind_name(e.op),
                   ref_to_string(e.arg_ref).c_str(), (long long)e.arg_key);
    } else {
      std::fprintf(f, "E %llu %lld %u respond %llu %s",
                   (unsigned long long)e.seq, (long long)e.tick, e.worker,
                   (unsigned long long)e.op_id, status_name(e.st));
      for (const auto& r : e.result_refs)
        std::fprintf(f, " %s", ref_to_string(r).c_str());
      std::fprintf(f, "\n");
    }
  }
  std::fclose(f);
  return true;
}

void NodeLifetimes::on_birth(const NodeIdentity& id, int64_t key,
                             uint64_t seq) {
  auto it = windows_.find(id);
  if (it == windows_.end()) {
    windows_[id] = Window{key, seq, kNoDeath};
  }
  // A Move re-materializes an existing node; keep the original birth.
}

void NodeLifetimes::on_death(const NodeIdentity& id, uint64_t seq) {
  auto it = windows_.find(id);
  if (it == windows_.end()) return;
  if (seq < it->second.death) it->second.death = seq;
}

}  // namespace dlist
