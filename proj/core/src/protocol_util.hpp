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

#include "dlist/server.hpp"

namespace dlist {
namespace protocol {

/// Protocol-grade snapshot: every field read through the atomic cells.
inline ItemSnapshot live_snapshot(Server& srv, Node* n) {
  ItemSnapshot s;
  s.kind = KeyKind(n->key_kind.load());
  s.key = n->key_value;
  s.is_deleted = n->is_deleted.load() != 0;
  s.next = unpack_ref(srv.rdcss().read(&n->next));
  s.new_location = unpack_ref(n->new_location.load());
  s.ts = n->ts;
  s.origin_sid = n->origin_sid;
  return s;
}

/// Lamport-style join: received items advance the local clock so later
/// local inserts outrank every resident timestamp.
inline void join_clock(Server& srv, int64_t ts) {
  for (;;) {
    int64_t cur = srv.logical_clock().get();
    if (cur >= ts) return;
    if (srv.logical_clock().cas_value(cur, ts)) return;
  }
}

}  // namespace protocol
}  // namespace dlist
