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

// Append-only JSONL event log with periodic snapshots. Each line is one
// event {seq, user_id, action, payload, timestamp}; the snapshot file holds
// a full state dump tagged with the last seq it covers.

#ifndef LACE_EVENT_LOG_H_
#define LACE_EVENT_LOG_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lace {

enum class EventAction {
  kCreate,
  kAddConcept,
  kRemoveConcept,
  kRenameConcept,
  kSelect,
  kClearSelection,
  kSaveDoc,
  kUnsaveDoc,
};

std::string_view EventActionName(EventAction action);
EventAction ParseEventAction(std::string_view name);

struct EventLogEntry {
  std::uint64_t seq = 0;
  std::string user_id;
  EventAction action = EventAction::kCreate;
  nlohmann::json payload = nlohmann::json::object();
  // ISO-8601 UTC. Not part of the replayed state.
  std::string timestamp;

  nlohmann::json ToJson() const;
  static EventLogEntry FromJson(const nlohmann::json& j);
};

struct Snapshot {
  std::uint64_t seq = 0;
  nlohmann::json state;
};

// Outcome of reading a log from disk.
struct LogReadResult {
  std::vector<EventLogEntry> entries;
  // End byte offset of each entry.
  std::vector<std::uintmax_t> end_offsets;
  std::uint64_t last_valid_seq = 0;
  // Byte length of the valid prefix.
  std::uintmax_t valid_bytes = 0;
  // Set when reading stopped before the end of the file.
  std::optional<std::string> halt_reason;
  std::size_t halt_line = 0;
  std::size_t discarded_lines = 0;

  nlohmann::json ReportJson() const;
};

// Reads events in file order, stopping at the first line that does not
// parse or whose seq does not increase. A missing file reads as empty.
LogReadResult ReadEventLog(const std::filesystem::path& path);

std::string NowTimestamp();

// Single-writer append handle. Append() assigns the next seq and flushes the
// line before returning.
class EventLog {
 public:
  static constexpr std::string_view kLogFile = "events.jsonl";
  static constexpr std::string_view kSnapshotFile = "snapshot.json";

  // Opens (creating if needed) the log in `dir`, continuing after
  // `last_seq`. The file is first truncated to `valid_bytes` when given.
  EventLog(const std::filesystem::path& dir, std::uint64_t last_seq,
           std::optional<std::uintmax_t> valid_bytes = std::nullopt);

  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  EventLogEntry Append(std::string user_id, EventAction action,
                       nlohmann::json payload);
  std::uint64_t last_seq() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::ofstream out_;
  std::uint64_t last_seq_;
};

// Written to a temporary file and renamed into place.
void WriteSnapshot(const std::filesystem::path& dir, const Snapshot& snapshot);
// nullopt when no snapshot exists; throws kLoad when it is unreadable.
std::optional<Snapshot> ReadSnapshot(const std::filesystem::path& dir);

}  // namespace lace

#endif  // LACE_EVENT_LOG_H_
