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

#include "dlist/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dlist {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

const char* cmd_name(ScriptCmd::Kind k) {
  switch (k) {
    case ScriptCmd::Kind::Split: return "split";
    case ScriptCmd::Kind::Move: return "move";
    case ScriptCmd::Kind::Checkpoint: return "checkpoint";
    case ScriptCmd::Kind::PauseClients: return "pause_clients";
    case ScriptCmd::Kind::ResumeClients: return "resume_clients";
    case ScriptCmd::Kind::Delink: return "delink";
  }
  return "?";
}

}  // namespace

bool parse_script(const std::string& text, std::vector<ScriptCmd>* out,
                  std::string* err) {
  out->clear();
  for (const std::string& raw : split(text, ';')) {
    std::string ent = trim(raw);
    if (ent.empty()) continue;
    std::istringstream in(ent);
    ScriptCmd cmd;
    std::string word;
    if (!(in >> cmd.at >> word)) {
      *err = "bad script entry: " + ent;
      return false;
    }
    if (word == "split") {
      std::string pos = "mid";
      if (!(in >> cmd.server >> cmd.sublist)) {
        *err = "split needs: <tick> split <server> <sublist> [pos]";
        return false;
      }
      if (in >> pos) cmd.pos = (pos == "mid") ? -1 : std::atoll(pos.c_str());
      cmd.kind = ScriptCmd::Kind::Split;
    } else if (word == "move") {
      if (!(in >> cmd.server >> cmd.sublist >> cmd.target)) {
        *err = "move needs: <tick> move <server> <sublist> <target>";
        return false;
      }
      cmd.kind = ScriptCmd::Kind::Move;
    } else if (word == "checkpoint") {
      cmd.kind = ScriptCmd::Kind::Checkpoint;
    } else if (word == "pause_clients") {
      cmd.kind = ScriptCmd::Kind::PauseClients;
    } else if (word == "resume_clients") {
      cmd.kind = ScriptCmd::Kind::ResumeClients;
    } else if (word == "delink") {
      if (!(in >> cmd.server)) {
        *err = "delink needs: <tick> delink <server>";
        return false;
      }
      cmd.kind = ScriptCmd::Kind::Delink;
    } else {
      *err = "unknown script command: " + word;
      return false;
    }
    out->push_back(cmd);
  }
  return true;
}

std::string script_to_text(const std::vector<ScriptCmd>& script) {
  std::ostringstream out;
  bool first = true;
  for (const auto& c : script) {
    if (!first) out << "; ";
    first = false;
    out << c.at << " " << cmd_name(c.kind);
    switch (c.kind) {
      case ScriptCmd::Kind::Split:
        out << " " << c.server << " " << c.sublist << " "
            << (c.pos < 0 ? std::string("mid") : std::to_string(c.pos));
        break;
      case ScriptCmd::Kind::Move:
        out << " " << c.server << " " << c.sublist << " " << c.target;
        break;
      case ScriptCmd::Kind::Delink:
        out << " " << c.server;
        break;
      default:
        break;
    }
  }
  return out.str();
}

bool ScenarioConfig::verify_enabled(const std::string& which) const {
  if (verify == "none") return false;
  if (verify == "all") return true;
  for (const auto& v : split(verify, ',')) {
    if (trim(v) == which) return true;
  }
  return false;
}

bool ScenarioConfig::apply(const std::string& key, const std::string& value,
                           std::string* err) {
  auto as_u64 = [&]() { return std::strtoull(value.c_str(), nullptr, 10); };
  auto as_i64 = [&]() { return std::strtoll(value.c_str(), nullptr, 10); };
  auto as_bool = [&]() { return value == "true" || value == "1"; };

  if (key == "protocol") {
    if (value == "am") protocol = Protocol::AM;
    else if (value == "tr") protocol = Protocol::TR;
    else { *err = "protocol must be am or tr"; return false; }
  } else if (key == "variant") {
    if (value == "unordered") variant = Variant::Unordered;
    else if (value == "sorted") variant = Variant::Sorted;
    else { *err = "variant must be unordered or sorted"; return false; }
  } else if (key == "servers") servers = uint32_t(as_u64());
  else if (key == "clients") clients = uint32_t(as_u64());
  else if (key == "seed") seed = as_u64();
  else if (key == "mix_insert") mix_insert = uint32_t(as_u64());
  else if (key == "mix_delete") mix_delete = uint32_t(as_u64());
  else if (key == "mix_lookup") mix_lookup = uint32_t(as_u64());
  else if (key == "mix_next") mix_next = uint32_t(as_u64());
  else if (key == "steps") steps = as_u64();
  else if (key == "ref_ttl") ref_ttl = as_i64();
  else if (key == "request_timeout") request_timeout = as_i64();
  else if (key == "split_threshold") split_threshold = uint32_t(as_u64());
  else if (key == "auto_split") auto_split = as_bool();
  else if (key == "move_batch") move_batch = uint32_t(as_u64());
  else if (key == "delay_min") delay_min = as_i64();
  else if (key == "delay_max") delay_max = as_i64();
  else if (key == "reorder") reorder = as_bool();
  else if (key == "initial_keys") initial_keys = uint32_t(as_u64());
  else if (key == "key_domain") key_domain = as_i64();
  else if (key == "script") {
    if (!parse_script(value, &script, err)) return false;
  } else if (key == "verify") verify = value;
  else if (key == "trace_out") trace_out = value;
  else if (key == "history_out") history_out = value;
  else if (key == "report_out") report_out = value;
  else if (key == "arena_capacity") arena_capacity = size_t(as_u64());
  else if (key == "rdcss_capacity") rdcss_capacity = size_t(as_u64());
  else if (key == "max_steps") max_steps = as_u64();
  else {
    *err = "unknown config key: " + key;
    return false;
  }
  return true;
}

bool ScenarioConfig::parse_text(const std::string& text, ScenarioConfig* out,
                                std::string* err) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      *err = "expected key=value, got: " + line;
      return false;
    }
    std::string k = trim(line.substr(0, eq));
    std::string v = trim(line.substr(eq + 1));
    if (!out->apply(k, v, err)) return false;
  }
  return out->validate(err);
}

bool ScenarioConfig::parse_file(const std::string& path, ScenarioConfig* out,
                                std::string* err) {
  std::ifstream f(path);
  if (!f) {
    *err = "cannot open config: " + path;
    return false;
  }
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_text(ss.str(), out, err);
}

bool ScenarioConfig::validate(std::string* err) const {
  if (servers == 0 || servers > 200) { *err = "servers out of range"; return false; }
  if (clients == 0 || clients > 64) { *err = "clients out of range"; return false; }
  if (delay_min < 1 || delay_max < delay_min) { *err = "bad net_delay"; return false; }
  if (mix_insert + mix_delete + mix_lookup + mix_next == 0) {
    *err = "op mix is all zero";
    return false;
  }
  if (ref_ttl < 1 || request_timeout < 1) { *err = "bad theta parts"; return false; }
  if (delay_max * 4 > theta()) {
    *err = "theta too small for the configured network delay";
    return false;
  }
  if (move_batch == 0) { *err = "move_batch must be >= 1"; return false; }
  for (const auto& c : script) {
    if (c.server >= servers) { *err = "script server out of range"; return false; }
    if (c.kind == ScriptCmd::Kind::Move && c.target >= servers) {
      *err = "script move target out of range";
      return false;
    }
  }
  return true;
}

std::string ScenarioConfig::to_text() const {
  std::ostringstream out;
  out << "protocol = " << (protocol == Protocol::AM ? "am" : "tr") << "\n";
  out << "variant = "
      << (variant == Variant::Unordered ? "unordered" : "sorted") << "\n";
  out << "servers = " << servers << "\n";
  out << "clients = " << clients << "\n";
  out << "seed = " << seed << "\n";
  out << "mix_insert = " << mix_insert << "\n";
  out << "mix_delete = " << mix_delete << "\n";
  out << "mix_lookup = " << mix_lookup << "\n";
  out << "mix_next = " << mix_next << "\n";
  out << "steps = " << steps << "\n";
  out << "ref_ttl = " << ref_ttl << "\n";
  out << "request_timeout = " << request_timeout << "\n";
  out << "split_threshold = " << split_threshold << "\n";
  out << "auto_split = " << (auto_split ? "true" : "false") << "\n";
  out << "move_batch = " << move_batch << "\n";
  out << "delay_min = " << delay_min << "\n";
  out << "delay_max = " << delay_max << "\n";
  out << "reorder = " << (reorder ? "true" : "false") << "\n";
  out << "initial_keys = " << initial_keys << "\n";
  out << "key_domain = " << key_domain << "\n";
  if (!script.empty()) out << "script = " << script_to_text(script) << "\n";
  out << "verify = " << verify << "\n";
  return out.str();
}

}  // namespace dlist
