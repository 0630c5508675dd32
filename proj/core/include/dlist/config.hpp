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
#include <string>
#include <vector>

#include "dlist/types.hpp"

namespace dlist {

enum class Protocol : uint8_t { AM, TR };
enum class Variant : uint8_t { Unordered, Sorted };

struct ScriptCmd {
  enum class Kind : uint8_t {
    Split,
    Move,
    Checkpoint,
    PauseClients,
    ResumeClients,
    Delink,
  };
  Tick at = 0;
  Kind kind = Kind::Checkpoint;
  uint32_t server = 0;
  uint32_t sublist = 0;   // registry index on that server
  uint32_t target = 0;    // move destination server
  int64_t pos = -1;       // split point (node index); -1 = middle
};

/// Everything that determines a run. Serialized into the trace header so a
/// replay can reconstruct the exact world.
struct ScenarioConfig {
  Protocol protocol = Protocol::AM;
  Variant variant = Variant::Unordered;
  uint32_t servers = 2;
  uint32_t clients = 2;
  uint64_t seed = 1;
  uint32_t mix_insert = 4;
  uint32_t mix_delete = 2;
  uint32_t mix_lookup = 3;
  uint32_t mix_next = 3;
  uint64_t steps = 100;  // total client operations across all clients
  Tick ref_ttl = 700;
  Tick request_timeout = 300;
  uint32_t split_threshold = 64;
  bool auto_split = false;
  uint32_t move_batch = 1;
  Tick delay_min = 1;
  Tick delay_max = 3;
  bool reorder = true;
  uint32_t initial_keys = 8;
  int64_t key_domain = 1000000;  // sorted keys are in (0, key_domain]
  std::vector<ScriptCmd> script;
  std::string verify = "all";  // comma list of lin,lookup,replay,counters
  std::string trace_out;
  std::string history_out;
  std::string report_out;
  size_t arena_capacity = 1 << 16;
  size_t rdcss_capacity = 1 << 17;
  uint64_t max_steps = 20000000;  // scheduler budget guard

  Tick theta() const { return ref_ttl + request_timeout; }
  bool verify_enabled(const std::string& which) const;

  /// Flat key=value rendering, one per line; script entries inline.
  std::string to_text() const;

  static bool parse_file(const std::string& path, ScenarioConfig* out,
                         std::string* err);
  static bool parse_text(const std::string& text, ScenarioConfig* out,
                         std::string* err);
  /// Apply one "key=value" override.
  bool apply(const std::string& key, const std::string& value,
             std::string* err);
  bool validate(std::string* err) const;
};

bool parse_script(const std::string& text, std::vector<ScriptCmd>* out,
                  std::string* err);
std::string script_to_text(const std::vector<ScriptCmd>& script);

}  // namespace dlist
