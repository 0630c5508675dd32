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

#include "dlist/types.hpp"

#include <cstdio>

namespace dlist {

const char* key_kind_name(KeyKind k) {
  switch (k) {
    case KeyKind::App: return "app";
    case KeyKind::Head: return "head";
    case KeyKind::Tail: return "tail";
    case KeyKind::SubHead: return "subhead";
    case KeyKind::SubTail: return "subtail";
    case KeyKind::Dummy: return "dummy";
  }
  return "?";
}

const char* status_name(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::NotFound: return "not_found";
    case Status::SentinelTarget: return "sentinel_target";
    case Status::UnknownRef: return "unknown_ref";
    case Status::LeaseExpired: return "lease_expired";
    case Status::DuplicateKey: return "duplicate_key";
    case Status::Busy: return "busy";
    case Status::NotCovered: return "not_covered";
    case Status::Timeout: return "timeout";
    case Status::ProtocolError: return "protocol_error";
  }
  return "?";
}

std::string ref_to_string(const ItemRef& r) {
  if (r.is_nil()) return "nil";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "s%u/%u#%u", r.sid, r.slot, r.gen);
  return buf;
}

}  // namespace dlist
