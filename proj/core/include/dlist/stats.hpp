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

#include <cstdint>

#include "dlist/types.hpp"

namespace dlist {

/// Counters gathered during a run and rendered into the report.
struct RunStats {
  uint64_t ops_insert = 0;
  uint64_t ops_delete = 0;
  uint64_t ops_lookup = 0;
  uint64_t ops_next = 0;
  uint64_t ops_get_item = 0;

  uint64_t delegated_insert = 0;
  uint64_t delegated_delete = 0;
  uint64_t delegated_next = 0;
  uint64_t delegated_lookup = 0;

  uint64_t move_attempts = 0;
  uint64_t move_aborts = 0;
  uint64_t splits = 0;
  uint64_t switches = 0;

  uint64_t replicate_insert_sent = 0;
  uint64_t replicate_delete_sent = 0;
  uint64_t insert_replays = 0;
  uint64_t delete_replays = 0;

  uint64_t delinked_nodes = 0;
  uint64_t lookup_duplicates = 0;
  uint64_t response_timeouts = 0;
  uint64_t lease_rejections = 0;

  uint64_t responses = 0;
  uint64_t requests = 0;
  Tick latency_total = 0;  // summed per completed client op
  uint64_t latency_samples = 0;

  uint64_t search_visits = 0;  // sorted: node visits across searches
  uint64_t searches = 0;
};

}  // namespace dlist
