/*
 * Copyright 2026 The LACE Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lace/event_log.h"

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <utility>

#include "lace/error.h"

namespace lace {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<EventAction, std::string_view>, 8> kActionNames{{
    {EventAction::kCreate, "create"},
    {EventAction::kAddConcept, "add_concept"},
    {EventAction::kRemoveConcept, "remove_concept"},
    {EventAction::kRenameConcept, "rename_concept"},
    {EventAction::kSelect, "select"},
    {EventAction::kClearSelection, "clear_selection"},
    {EventAction::kSaveDoc, "save_doc"},
    {EventAction::kUnsaveDoc, "unsave_doc"},
}};

}  // namespace

std::string_view EventActionName(EventAction action) {
  for (const auto& [a, name] : kActionNames) {
    if (a == action) return name;
  }
  return "unknown";
}

EventAction ParseEventAction(std::string_view name) {
  for (const auto& [a, n] : kActionNames) {
    if (n == name) return a;
  }
  throw Error(ErrorCode::kInvalidInput, "unknown event action '" + std::string(name) + "'");
}

json EventLogEntry::ToJson() const {
  return json{{"seq", seq},
              {"user_id", user_id},
              {"action", EventActionName(action)},
              {"payload", payload},
              {"timestamp", timestamp}};
}

EventLogEntry EventLogEntry::FromJson(const json& j) {
  EventLogEntry e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.user_id = j.at("user_id").get<std::string>();
  e.action = ParseEventAction(j.at("action").get<std::string>());
  e.payload = j.at("payload");
  if (!e.payload.is_object()) {
    throw Error(ErrorCode::kLoad, "event payload must be an object");
  }
  e.timestamp = j.value("timestamp", "");
  return e;
}

json LogReadResult::ReportJson() const {
  json j{{"events", entries.size()}, {"last_valid_seq", last_valid_seq}};
  if (halt_reason) {
    j["halted"] = true;
    j["halt_line"] = halt_line;
    j["reason"] = *halt_reason;
    j["discarded_lines"] = discarded_lines;
  } else {
    j["halted"] = false;
  }
  return j;
}

LogReadResult ReadEventLog(const std::filesystem::path& path) {
  LogReadResult result;
  std::ifstream in(path, std::ios::binary);
  if (!in) return result;
  std::string line;
  std::size_t line_no = 0;
  std::uintmax_t offset = 0;
  while (true) {
    if (!std::getline(in, line)) break;
    ++line_no;
    const bool terminated = !in.eof();
    const std::uintmax_t next = offset + line.size() + (terminated ? 1 : 0);
    if (!result.halt_reason) {
      std::string reason;
      if (!terminated) {
        reason = "final line is not newline-terminated";
      } else {
        try {
          EventLogEntry e = EventLogEntry::FromJson(json::parse(line));
          if (e.seq <= result.last_valid_seq) {
            reason = "seq " + std::to_string(e.seq) + " does not increase";
          } else {
            result.last_valid_seq = e.seq;
            result.entries.push_back(std::move(e));
            result.end_offsets.push_back(next);
            result.valid_bytes = next;
          }
        } catch (const std::exception& ex) {
          reason = ex.what();
        }
      }
      if (!reason.empty()) {
        result.halt_reason = std::move(reason);
        result.halt_line = line_no;
      }
    }
    if (result.halt_reason) ++result.discarded_lines;
    offset = next;
  }
  return result;
}

std::string NowTimestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()) %
                  1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<int>(ms.count()));
  return buf;
}

EventLog::EventLog(const std::filesystem::path& dir, std::uint64_t last_seq,
                   std::optional<std::uintmax_t> valid_bytes)
    : dir_(dir), last_seq_(last_seq) {
  std::filesystem::create_directories(dir_);
  const std::filesystem::path path = dir_ / kLogFile;
  if (valid_bytes && std::filesystem::exists(path) &&
      std::filesystem::file_size(path) != *valid_bytes) {
    std::filesystem::resize_file(path, *valid_bytes);
  }
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) {
    throw Error(ErrorCode::kLoad, "cannot open event log", path.string());
  }
}

EventLogEntry EventLog::Append(std::string user_id, EventAction action,
                               json payload) {
  std::lock_guard lock(mu_);
  EventLogEntry e;
  e.seq = last_seq_ + 1;
  e.user_id = std::move(user_id);
  e.action = action;
  e.payload = std::move(payload);
  e.timestamp = NowTimestamp();
  out_ << e.ToJson().dump() << '\n';
  out_.flush();
  if (!out_) {
    throw Error(ErrorCode::kInternal, "event log write failed",
                (dir_ / kLogFile).string());
  }
  last_seq_ = e.seq;
  return e;
}

std::uint64_t EventLog::last_seq() const {
  std::lock_guard lock(mu_);
  return last_seq_;
}

void WriteSnapshot(const std::filesystem::path& dir, const Snapshot& snapshot) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path final_path = dir / EventLog::kSnapshotFile;
  std::filesystem::path tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << json{{"seq", snapshot.seq}, {"state", snapshot.state}}.dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kInternal, "snapshot write failed", tmp.string());
  }
  std::filesystem::rename(tmp, final_path);
}

std::optional<Snapshot> ReadSnapshot(const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / EventLog::kSnapshotFile;
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    return Snapshot{j.at("seq").get<std::uint64_t>(), j.at("state")};
  } catch (const std::exception& ex) {
    throw Error(ErrorCode::kLoad, "unreadable snapshot", ex.what());
  }
}

}  // namespace lace
