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

#include <string>
#include <vector>

#include "dlist/stats.hpp"
#include "dlist/types.hpp"

namespace dlist {

/// Post-run summary with a stable key = value schema.
struct Report {
  RunStats stats;
  std::vector<std::string> checks;      // "<name> = pass|fail <detail>"
  std::vector<std::string> violations;  // empty means a clean run
  uint64_t trace_digest = 0;
  std::string trace_path;
  std::string history_path;
  Tick end_tick = 0;
  uint64_t sim_steps = 0;

  bool ok() const { return violations.empty(); }
  std::string render() const;
  bool write_file(const std::string& path) const;
};

}  // namespace dlist
