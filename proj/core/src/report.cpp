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

#include "dlist/report.hpp"

#include <cstdio>
#include <sstream>

namespace dlist {

std::string Report::render() const {
  std::ostringstream out;
  out << "report.version = 1\n";
  out << "ops.insert = " << stats.ops_insert << "\n";
  out << "ops.delete = " << stats.ops_delete << "\n";
  out << "ops.lookup = " << stats.ops_lookup << "\n";
  out << "ops.next = " << stats.ops_next << "\n";
  out << "ops.get_item = " << stats.ops_get_item << "\n";
  out << "delegated.insert = " << stats.delegated_insert << "\n";
  out << "delegated.delete = " << stats.delegated_delete << "\n";
  out << "delegated.next = " << stats.delegated_next << "\n";
  out << "delegated.lookup = " << stats.delegated_lookup << "\n";
  out << "move.attempts = " << stats.move_attempts << "\n";
  out << "move.aborts = " << stats.move_aborts << "\n";
  out << "splits = " << stats.splits << "\n";
  out << "switches = " << stats.switches << "\n";
  out << "replicate.insert = " << stats.replicate_insert_sent << "\n";
  out << "replicate.delete = " << stats.replicate_delete_sent << "\n";
  out << "replay.insert = " << stats.insert_replays << "\n";
  out << "replay.delete = " << stats.delete_replays << "\n";
  out << "delinked = " << stats.delinked_nodes << "\n";
  out << "lookup.duplicates = " << stats.lookup_duplicates << "\n";
  out << "timeouts = " << stats.response_timeouts << "\n";
  out << "lease.rejections = " << stats.lease_rejections << "\n";
  out << "requests = " << stats.requests << "\n";
  out << "responses = " << stats.responses << "\n";
  if (stats.latency_samples > 0) {
    out << "latency.avg_ticks = "
        << (stats.latency_total / Tick(stats.latency_samples)) << "\n";
  }
  if (stats.searches > 0) {
    out << "search.visits_avg = " << (stats.search_visits / stats.searches)
        << "\n";
  }
  out << "sim.end_tick = " << end_tick << "\n";
  out << "sim.steps = " << sim_steps << "\n";
  char digest[32];
  std::snprintf(digest, sizeof(digest), "%016llx",
                (unsigned long long)trace_digest);
  out << "trace.digest = " << digest << "\n";
  if (!trace_path.empty()) out << "trace.path = " << trace_path << "\n";
  if (!history_path.empty()) out << "history.path = " << history_path << "\n";
  for (const auto& c : checks) out << "check." << c << "\n";
  for (const auto& v : violations) out << "violation = " << v << "\n";
  out << "exit = " << (ok() ? "ok" : "violation") << "\n";
  return out.str();
}

bool Report::write_file(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) return false;
  std::string text = render();
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
  return true;
}

}  // namespace dlist
