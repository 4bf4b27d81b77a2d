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

// The recommendation service: an immutable index, per-user records built
// from an event log, and the operations exposed over HTTP and the CLI.

#ifndef LACE_SERVICE_H_
#define LACE_SERVICE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lace/corpus.h"
#include "lace/embedder.h"
#include "lace/event_log.h"
#include "lace/profile.h"
#include "lace/ranker.h"

namespace lace {

struct ServiceConfig {
  double retain_fraction = kDefaultRetainFraction;
  RankConfig rank;
  double triplet_margin = kDefaultTripletMargin;
  std::size_t default_k = 30;
  // A snapshot is written after every this many events; 0 disables.
  std::size_t snapshot_every = 100;

  void Validate() const;
  nlohmann::json ToJson() const;
  // Keys absent from `j` keep their defaults.
  static ServiceConfig FromJson(const nlohmann::json& j);
};

// Hyperparameter dump of a default-constructed ServiceConfig.
nlohmann::json DefaultConfigJson();

// Corpus, inventory and candidate set, fixed for the service lifetime.
class Index {
 public:
  static constexpr const char* kManifestFile = "manifest.json";
  static constexpr const char* kCandidatesFile = "candidates.txt";
  static constexpr const char* kTextCacheFile = "text_cache.jsonl";

  // Empty `candidate_ids` means every corpus document is a candidate.
  Index(Corpus corpus, ConceptInventory inventory,
        std::vector<std::string> candidate_ids = {});
  Index(const Index&) = delete;
  Index& operator=(const Index&) = delete;

  // documents.jsonl, embeddings.bin|embeddings.jsonl, inventory.jsonl and
  // optionally candidates.txt (one doc id per line).
  static std::shared_ptr<const Index> Load(const std::filesystem::path& dir);

  const Corpus& corpus() const { return corpus_; }
  const ConceptInventory& inventory() const { return inventory_; }
  const std::vector<std::string>& candidate_ids() const { return candidate_ids_; }
  std::span<const Document* const> candidates() const { return candidates_; }
  nlohmann::json Manifest() const;

 private:
  Corpus corpus_;
  ConceptInventory inventory_;
  std::vector<std::string> candidate_ids_;
  std::vector<const Document*> candidates_;
};

struct IndexBuildOptions {
  std::filesystem::path documents;
  std::filesystem::path embeddings;
  std::filesystem::path inventory;
  std::optional<std::filesystem::path> candidates;
  std::optional<std::filesystem::path> text_cache;
  std::filesystem::path out;
};

// Validates the inputs, writes the index directory and returns its manifest.
nlohmann::json BuildIndex(const IndexBuildOptions& options);

// Provider seeded with the inventory concepts and the index text cache,
// falling back to `remote` for anything else.
std::shared_ptr<EmbeddingProvider> MakeEmbeddingProvider(
    const std::filesystem::path& index_dir, const Index& index,
    std::unique_ptr<EmbeddingClient> remote);

struct UserRecord {
  UserLibrary library;
  UserProfile profile;
  std::set<std::string> saved_doc_ids;
  std::uint64_t revision = 0;

  nlohmann::json ToJson(bool include_values) const;
};

struct Edit {
  enum class Kind { kAdd, kRemove, kRename, kSelect, kClear, kSetSelection };
  Kind kind = Kind::kClear;
  std::string text;
  std::string concept_id;
  // kSelect: concept_ids with `polarity`.
  std::vector<std::string> concept_ids;
  Polarity polarity = Polarity::kPositive;
  // kSetSelection: replaces every state.
  std::vector<std::string> positive;
  std::vector<std::string> negative;
  std::optional<std::uint64_t> expected_revision;

  // {"action": "add"|"remove"|"rename"|"select"|"clear", ...}.
  static Edit FromJson(const nlohmann::json& j);
};

enum class RankMode { kFull, kRerank };
std::string_view RankModeName(RankMode mode);
RankMode ParseRankMode(std::string_view name);

struct Recommendations {
  std::string user_id;
  std::uint64_t revision = 0;
  RankMode mode = RankMode::kFull;
  ScoredList list;

  nlohmann::json ToJson(const Corpus& corpus) const;
};

class Service {
 public:
  // With a data_dir the service recovers from it and logs every accepted
  // mutation there; without one it keeps state in memory only.
  Service(std::shared_ptr<const Index> index, ServiceConfig cfg,
          std::shared_ptr<EmbeddingProvider> embedder,
          std::optional<std::filesystem::path> data_dir = std::nullopt);
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const Index& index() const { return *index_; }
  const ServiceConfig& config() const { return cfg_; }
  // Recovery outcome: events replayed, last seq, and where it halted.
  const nlohmann::json& recovery_report() const { return recovery_report_; }

  // Throws kConflict for an existing user, kValidation for unknown docs.
  UserRecord CreateUser(const std::string& user_id,
                        const std::vector<std::string>& doc_ids);
  // Throws kNotFound for an unknown user, kConflict on a revision mismatch,
  // and the profile errors of the edit itself.
  UserRecord ApplyEdit(const std::string& user_id, const Edit& edit);
  UserRecord SetSaved(const std::string& user_id, const std::string& doc_id,
                      bool saved,
                      std::optional<std::uint64_t> expected_revision = std::nullopt);

  UserRecord GetUser(const std::string& user_id) const;
  std::vector<std::string> UserIds() const;
  // Full-scan recommendations skip the user's own library documents.
  // kRerank requires `first_stage`.
  Recommendations GetRecommendations(
      const std::string& user_id, std::optional<std::size_t> k = std::nullopt,
      RankMode mode = RankMode::kFull,
      const std::optional<std::filesystem::path>& first_stage = std::nullopt) const;

  // Every user record, sorted by user_id, values included.
  nlohmann::json SerializeState() const;
  void WriteSnapshotNow();
  std::uint64_t last_seq() const;
  nlohmann::json Health() const;

 private:
  struct Slot {
    explicit Slot(UserRecord r) : record(std::move(r)) {}
    std::mutex mu;
    UserRecord record;
  };

  // State transition shared by live mutations and replay.
  UserRecord Apply(const UserRecord* current, const std::string& user_id,
                   EventAction action, const nlohmann::json& payload) const;
  UserRecord Mutate(const std::string& user_id, EventAction action,
                    nlohmann::json payload,
                    std::optional<std::uint64_t> expected_revision);
  std::uint64_t Record(const std::string& user_id, EventAction action,
                       const nlohmann::json& payload);
  void MaybeSnapshot(std::uint64_t seq);
  void Recover();
  Vector EmbedConcept(const std::string& text) const;
  UserRecord RecordFromJson(const nlohmann::json& j) const;
  nlohmann::json SerializeLocked() const;
  std::shared_ptr<Slot> FindSlot(const std::string& user_id) const;

  std::shared_ptr<const Index> index_;
  ServiceConfig cfg_;
  std::shared_ptr<EmbeddingProvider> embedder_;
  std::optional<std::filesystem::path> data_dir_;
  std::unique_ptr<EventLog> log_;
  std::uint64_t memory_seq_ = 0;
  nlohmann::json recovery_report_;

  // Mutations hold it shared, creation and snapshots exclusively.
  mutable std::shared_mutex users_mu_;
  std::map<std::string, std::shared_ptr<Slot>> users_;
  mutable std::mutex seq_mu_;
};

}  // namespace lace

#endif  // LACE_SERVICE_H_
