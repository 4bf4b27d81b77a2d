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

#include "lace/service.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <utility>

#include "lace/embedding_io.h"
#include "lace/error.h"

namespace lace {

using nlohmann::json;

namespace {

std::vector<std::string> ReadIdList(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kLoad, "cannot open id list", path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const std::string id = line.substr(0, line.find_last_not_of(" \t\r") + 1);
    if (!id.empty()) ids.push_back(id);
  }
  return ids;
}

json Strings(const std::vector<std::string>& v) { return json(v); }

std::vector<std::string> StringList(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  const json& v = j.at(key);
  if (!v.is_array()) {
    throw Error(ErrorCode::kInvalidInput, std::string("'") + key + "' must be an array");
  }
  std::vector<std::string> out;
  for (const json& item : v) {
    if (!item.is_string()) {
      throw Error(ErrorCode::kInvalidInput,
                  std::string("'") + key + "' must hold strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string RequiredString(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string() ||
      j.at(key).get<std::string>().empty()) {
    throw Error(ErrorCode::kInvalidInput,
                std::string("missing or empty string field '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

Vector EmbeddingFromJson(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json EmbeddingToJson(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

void ServiceConfig::Validate() const {
  if (!(retain_fraction > 0.0 && retain_fraction <= 1.0)) {
    throw Error(ErrorCode::kConfiguration, "retain_fraction must be in (0, 1]");
  }
  if (!(triplet_margin >= 0.0)) {
    throw Error(ErrorCode::kConfiguration, "triplet_margin must be nonnegative");
  }
  if (default_k == 0) throw Error(ErrorCode::kConfiguration, "default_k must be positive");
  rank.Validate();
}

json ServiceConfig::ToJson() const {
  return json{
      {"profile", {{"retain_fraction", retain_fraction}}},
      {"ranking",
       {{"t_fraction", rank.t_fraction},
        {"rerank_depth", rank.rerank_depth},
        {"num_threads", rank.num_threads},
        {"triplet_margin", triplet_margin},
        {"default_k", default_k}}},
      {"ot",
       {{"epsilon", rank.ot.epsilon},
        {"lambda", 1.0 / rank.ot.epsilon},
        {"max_iters", rank.ot.max_iters},
        {"convergence_tol", rank.ot.convergence_tol}}},
      {"persistence", {{"snapshot_every", snapshot_every}}},
  };
}

ServiceConfig ServiceConfig::FromJson(const json& j) {
  ServiceConfig c;
  const json empty = json::object();
  const json& profile = j.contains("profile") ? j.at("profile") : empty;
  const json& ranking = j.contains("ranking") ? j.at("ranking") : empty;
  const json& ot = j.contains("ot") ? j.at("ot") : empty;
  const json& persistence = j.contains("persistence") ? j.at("persistence") : empty;
  c.retain_fraction = profile.value("retain_fraction", c.retain_fraction);
  c.rank.t_fraction = ranking.value("t_fraction", c.rank.t_fraction);
  c.rank.rerank_depth = ranking.value("rerank_depth", c.rank.rerank_depth);
  c.rank.num_threads = ranking.value("num_threads", c.rank.num_threads);
  c.triplet_margin = ranking.value("triplet_margin", c.triplet_margin);
  c.default_k = ranking.value("default_k", c.default_k);
  c.rank.ot.epsilon = ot.value("epsilon", c.rank.ot.epsilon);
  if (ot.contains("lambda")) {
    const double lambda = ot.at("lambda").get<double>();
    if (!(lambda > 0.0)) throw Error(ErrorCode::kConfiguration, "ot.lambda must be positive");
    // A config dump carries both; accept them when they agree.
    if (ot.contains("epsilon") &&
        std::abs(lambda * c.rank.ot.epsilon - 1.0) > 1e-9) {
      throw Error(ErrorCode::kConfiguration, "ot.lambda and ot.epsilon disagree");
    }
    c.rank.ot.epsilon = 1.0 / lambda;
  }
  c.rank.ot.max_iters = ot.value("max_iters", c.rank.ot.max_iters);
  c.rank.ot.convergence_tol = ot.value("convergence_tol", c.rank.ot.convergence_tol);
  c.snapshot_every = persistence.value("snapshot_every", c.snapshot_every);
  c.Validate();
  return c;
}

json DefaultConfigJson() { return ServiceConfig{}.ToJson(); }

Index::Index(Corpus corpus, ConceptInventory inventory,
             std::vector<std::string> candidate_ids)
    : corpus_(std::move(corpus)),
      inventory_(std::move(inventory)),
      candidate_ids_(std::move(candidate_ids)) {
  CheckDimensions(corpus_, inventory_);
  if (candidate_ids_.empty()) {
    for (const Document& d : corpus_.documents()) candidate_ids_.push_back(d.doc_id);
  }
  std::set<std::string> seen;
  for (const std::string& id : candidate_ids_) {
    const Document* d = corpus_.Find(id);
    if (d == nullptr) {
      throw Error(ErrorCode::kLoad, "candidate '" + id + "' is not in the corpus");
    }
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::kLoad, "duplicate candidate '" + id + "'");
    }
    candidates_.push_back(d);
  }
}

std::shared_ptr<const Index> Index::Load(const std::filesystem::path& dir) {
  Corpus corpus = LoadCorpus(dir);
  ConceptInventory inventory = LoadInventory(dir / "inventory.jsonl");
  std::vector<std::string> candidates;
  if (std::filesystem::exists(dir / kCandidatesFile)) {
    candidates = ReadIdList(dir / kCandidatesFile);
  }
  return std::make_shared<const Index>(std::move(corpus), std::move(inventory),
                                       std::move(candidates));
}

json Index::Manifest() const {
  return json{{"format", "lace-index"},
              {"version", 1},
              {"dim", corpus_.dim()},
              {"corpus_size", corpus_.size()},
              {"inventory_size", inventory_.size()},
              {"candidate_count", candidate_ids_.size()}};
}

json BuildIndex(const IndexBuildOptions& options) {
  Corpus corpus = LoadCorpus(options.documents, options.embeddings);
  ConceptInventory inventory = LoadInventory(options.inventory);
  std::vector<std::string> candidates;
  if (options.candidates) candidates = ReadIdList(*options.candidates);
  const Index index(std::move(corpus), std::move(inventory), candidates);

  std::filesystem::create_directories(options.out);
  WriteDocumentsJsonl(options.out / "documents.jsonl", index.corpus().documents());
  WriteEmbeddingsBinary(options.out / "embeddings.bin",
                        ToEmbeddingTable(index.corpus().documents()));
  WriteInventoryJsonl(options.out / "inventory.jsonl", index.inventory());
  if (options.candidates) {
    std::ofstream out(options.out / Index::kCandidatesFile);
    for (const std::string& id : index.candidate_ids()) out << id << '\n';
  }
  if (options.text_cache) {
    const EmbeddingTable cache = ReadEmbeddings(*options.text_cache);
    WriteEmbeddingsJsonl(options.out / Index::kTextCacheFile, cache);
  }
  const json manifest = index.Manifest();
  std::ofstream(options.out / Index::kManifestFile) << manifest.dump(2) << '\n';
  return manifest;
}

std::shared_ptr<EmbeddingProvider> MakeEmbeddingProvider(
    const std::filesystem::path& index_dir, const Index& index,
    std::unique_ptr<EmbeddingClient> remote) {
  auto provider =
      std::make_shared<EmbeddingProvider>(index.corpus().dim(), std::move(remote));
  provider->SeedFromInventory(index.inventory());
  if (std::filesystem::exists(index_dir / Index::kTextCacheFile)) {
    provider->LoadCacheFile(index_dir / Index::kTextCacheFile);
  }
  return provider;
}

json UserRecord::ToJson(bool include_values) const {
  return json{{"user_id", library.user_id},
              {"revision", revision},
              {"doc_ids", library.doc_ids},
              {"saved_doc_ids", std::vector<std::string>(saved_doc_ids.begin(),
                                                         saved_doc_ids.end())},
              {"profile", ProfileToJson(profile, include_values)}};
}

Edit Edit::FromJson(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidInput, "edit must be an object");
  Edit e;
  const std::string action = RequiredString(j, "action");
  if (action == "add") {
    e.kind = Kind::kAdd;
    e.text = RequiredString(j, "text");
  } else if (action == "remove") {
    e.kind = Kind::kRemove;
    e.concept_id = RequiredString(j, "concept_id");
  } else if (action == "rename") {
    e.kind = Kind::kRename;
    e.concept_id = RequiredString(j, "concept_id");
    e.text = RequiredString(j, "text");
  } else if (action == "select") {
    e.kind = Kind::kSelect;
    e.concept_ids = StringList(j, "concept_ids");
    if (e.concept_ids.empty()) {
      throw Error(ErrorCode::kInvalidInput, "select needs concept_ids");
    }
    e.polarity = ParsePolarity(j.value("polarity", "positive"));
  } else if (action == "clear") {
    e.kind = Kind::kClear;
  } else {
    throw Error(ErrorCode::kInvalidInput, "unknown edit action '" + action + "'");
  }
  if (j.contains("expected_revision") && !j.at("expected_revision").is_null()) {
    e.expected_revision = j.at("expected_revision").get<std::uint64_t>();
  }
  return e;
}

std::string_view RankModeName(RankMode mode) {
  return mode == RankMode::kFull ? "full" : "rerank";
}

RankMode ParseRankMode(std::string_view name) {
  if (name == "full") return RankMode::kFull;
  if (name == "rerank") return RankMode::kRerank;
  throw Error(ErrorCode::kInvalidInput, "unknown mode '" + std::string(name) + "'");
}

json Recommendations::ToJson(const Corpus& corpus) const {
  json results = json::array();
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Document* d = corpus.Find(list[i].doc_id);
    results.push_back({{"rank", i + 1},
                       {"doc_id", list[i].doc_id},
                       {"title", d ? d->title : ""},
                       {"score", list[i].score}});
  }
  return json{{"user_id", user_id},
              {"revision", revision},
              {"mode", RankModeName(mode)},
              {"k", list.size()},
              {"results", std::move(results)}};
}

Service::Service(std::shared_ptr<const Index> index, ServiceConfig cfg,
                 std::shared_ptr<EmbeddingProvider> embedder,
                 std::optional<std::filesystem::path> data_dir)
    : index_(std::move(index)),
      cfg_(std::move(cfg)),
      embedder_(std::move(embedder)),
      data_dir_(std::move(data_dir)) {
  if (!index_) throw Error(ErrorCode::kConfiguration, "service needs an index");
  cfg_.Validate();
  if (data_dir_) {
    Recover();
  } else {
    recovery_report_ = json{{"events", 0}, {"last_valid_seq", 0}, {"halted", false}};
  }
}

UserRecord Service::Apply(const UserRecord* current, const std::string& user_id,
                          EventAction action, const json& payload) const {
  if (action == EventAction::kCreate) {
    if (current != nullptr) {
      throw Error(ErrorCode::kConflict, "user '" + user_id + "' already exists");
    }
    UserLibrary library{user_id, StringList(payload, "doc_ids")};
    if (library.doc_ids.empty()) {
      throw Error(ErrorCode::kValidation, "a library needs at least one document");
    }
    std::set<std::string> seen;
    for (const std::string& id : library.doc_ids) {
      if (index_->corpus().Find(id) == nullptr) {
        throw Error(ErrorCode::kValidation, "unknown document '" + id + "'");
      }
      if (!seen.insert(id).second) {
        throw Error(ErrorCode::kValidation, "duplicate document '" + id + "'");
      }
    }
    UserProfile profile = BuildProfile(library, index_->corpus(), index_->inventory(),
                                       cfg_.retain_fraction, cfg_.rank.ot);
    return UserRecord{std::move(library), std::move(profile), {}, 1};
  }
  if (current == nullptr) {
    throw Error(ErrorCode::kNotFound, "unknown user '" + user_id + "'");
  }
  UserRecord next = *current;
  switch (action) {
    case EventAction::kAddConcept:
      next.profile = AddConcept(current->profile, payload.at("text").get<std::string>(),
                                EmbeddingFromJson(payload.at("embedding")));
      break;
    case EventAction::kRemoveConcept:
      next.profile =
          RemoveConcept(current->profile, payload.at("concept_id").get<std::string>());
      break;
    case EventAction::kRenameConcept:
      next.profile = RenameConcept(
          current->profile, payload.at("concept_id").get<std::string>(),
          payload.at("text").get<std::string>(),
          EmbeddingFromJson(payload.at("embedding")));
      break;
    case EventAction::kSelect: {
      const auto positive = StringList(payload, "positive");
      const auto negative = StringList(payload, "negative");
      for (const std::string& id : positive) {
        if (std::find(negative.begin(), negative.end(), id) != negative.end()) {
          throw Error(ErrorCode::kInvalidInput,
                      "concept '" + id + "' is both positive and negative");
        }
      }
      UserProfile p = payload.value("replace", false)
                          ? ClearSelection(current->profile)
                          : current->profile;
      if (!positive.empty()) p = Select(p, positive, Polarity::kPositive);
      if (!negative.empty()) p = Select(p, negative, Polarity::kNegative);
      next.profile = std::move(p);
      break;
    }
    case EventAction::kClearSelection:
      next.profile = ClearSelection(current->profile);
      break;
    case EventAction::kSaveDoc:
    case EventAction::kUnsaveDoc: {
      const std::string doc_id = payload.at("doc_id").get<std::string>();
      if (index_->corpus().Find(doc_id) == nullptr) {
        throw Error(ErrorCode::kNotFound, "unknown document '" + doc_id + "'");
      }
      if (action == EventAction::kSaveDoc) {
        next.saved_doc_ids.insert(doc_id);
      } else {
        next.saved_doc_ids.erase(doc_id);
      }
      break;
    }
    case EventAction::kCreate:
      break;
  }
  next.revision = current->revision + 1;
  return next;
}

std::uint64_t Service::Record(const std::string& user_id, EventAction action,
                              const json& payload) {
  if (log_) return log_->Append(user_id, action, payload).seq;
  std::lock_guard lock(seq_mu_);
  return ++memory_seq_;
}

std::shared_ptr<Service::Slot> Service::FindSlot(const std::string& user_id) const {
  auto it = users_.find(user_id);
  if (it == users_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown user '" + user_id + "'");
  }
  return it->second;
}

UserRecord Service::CreateUser(const std::string& user_id,
                               const std::vector<std::string>& doc_ids) {
  if (user_id.empty()) throw Error(ErrorCode::kInvalidInput, "user_id must be nonempty");
  std::uint64_t seq = 0;
  std::optional<UserRecord> created;
  {
    std::unique_lock lock(users_mu_);
    if (users_.count(user_id)) {
      throw Error(ErrorCode::kConflict, "user '" + user_id + "' already exists");
    }
    const json payload{{"doc_ids", doc_ids}};
    created = Apply(nullptr, user_id, EventAction::kCreate, payload);
    seq = Record(user_id, EventAction::kCreate, payload);
    users_.emplace(user_id, std::make_shared<Slot>(*created));
  }
  MaybeSnapshot(seq);
  return *std::move(created);
}

UserRecord Service::Mutate(const std::string& user_id, EventAction action,
                           json payload,
                           std::optional<std::uint64_t> expected_revision) {
  std::uint64_t seq = 0;
  std::optional<UserRecord> next;
  {
    std::shared_lock users_lock(users_mu_);
    const std::shared_ptr<Slot> slot = FindSlot(user_id);
    std::lock_guard slot_lock(slot->mu);
    if (expected_revision && *expected_revision != slot->record.revision) {
      throw Error(ErrorCode::kConflict, "revision mismatch; reload and retry",
                  "expected " + std::to_string(*expected_revision) + ", current " +
                      std::to_string(slot->record.revision));
    }
    next = Apply(&slot->record, user_id, action, payload);
    seq = Record(user_id, action, payload);
    slot->record = *next;
  }
  MaybeSnapshot(seq);
  return *std::move(next);
}

Vector Service::EmbedConcept(const std::string& text) const {
  if (!embedder_) {
    throw Error(ErrorCode::kConfiguration, "no embedding provider configured");
  }
  return embedder_->EmbedOne(TextKind::kConcept, text);
}

UserRecord Service::ApplyEdit(const std::string& user_id, const Edit& edit) {
  switch (edit.kind) {
    case Edit::Kind::kAdd: {
      const Vector e = EmbedConcept(edit.text);
      return Mutate(user_id, EventAction::kAddConcept,
                    {{"text", edit.text}, {"embedding", EmbeddingToJson(e)}},
                    edit.expected_revision);
    }
    case Edit::Kind::kRemove:
      return Mutate(user_id, EventAction::kRemoveConcept,
                    {{"concept_id", edit.concept_id}}, edit.expected_revision);
    case Edit::Kind::kRename: {
      const Vector e = EmbedConcept(edit.text);
      return Mutate(user_id, EventAction::kRenameConcept,
                    {{"concept_id", edit.concept_id},
                     {"text", edit.text},
                     {"embedding", EmbeddingToJson(e)}},
                    edit.expected_revision);
    }
    case Edit::Kind::kSelect: {
      json payload{{"positive", json::array()},
                   {"negative", json::array()},
                   {"replace", false}};
      payload[edit.polarity == Polarity::kPositive ? "positive" : "negative"] =
          Strings(edit.concept_ids);
      return Mutate(user_id, EventAction::kSelect, std::move(payload),
                    edit.expected_revision);
    }
    case Edit::Kind::kSetSelection:
      return Mutate(user_id, EventAction::kSelect,
                    {{"positive", edit.positive},
                     {"negative", edit.negative},
                     {"replace", true}},
                    edit.expected_revision);
    case Edit::Kind::kClear:
      return Mutate(user_id, EventAction::kClearSelection, json::object(),
                    edit.expected_revision);
  }
  throw Error(ErrorCode::kInternal, "unhandled edit kind");
}

UserRecord Service::SetSaved(const std::string& user_id, const std::string& doc_id,
                             bool saved,
                             std::optional<std::uint64_t> expected_revision) {
  if (doc_id.empty()) throw Error(ErrorCode::kInvalidInput, "doc_id must be nonempty");
  return Mutate(user_id, saved ? EventAction::kSaveDoc : EventAction::kUnsaveDoc,
                {{"doc_id", doc_id}}, expected_revision);
}

UserRecord Service::GetUser(const std::string& user_id) const {
  std::shared_lock users_lock(users_mu_);
  const std::shared_ptr<Slot> slot = FindSlot(user_id);
  std::lock_guard slot_lock(slot->mu);
  return slot->record;
}

std::vector<std::string> Service::UserIds() const {
  std::shared_lock lock(users_mu_);
  std::vector<std::string> ids;
  for (const auto& [id, slot] : users_) ids.push_back(id);
  return ids;
}

Recommendations Service::GetRecommendations(
    const std::string& user_id, std::optional<std::size_t> k, RankMode mode,
    const std::optional<std::filesystem::path>& first_stage) const {
  const UserRecord record = GetUser(user_id);
  const std::size_t limit = k.value_or(cfg_.default_k);
  if (limit == 0) throw Error(ErrorCode::kInvalidInput, "k must be positive");
  Recommendations out{user_id, record.revision, mode, {}};
  if (mode == RankMode::kFull) {
    const std::set<std::string> own(record.library.doc_ids.begin(),
                                    record.library.doc_ids.end());
    std::vector<const Document*> candidates;
    candidates.reserve(index_->candidates().size());
    for (const Document* d : index_->candidates()) {
      if (!own.count(d->doc_id)) candidates.push_back(d);
    }
    out.list = Rank(record.profile, candidates, cfg_.rank, limit);
    return out;
  }
  if (!first_stage) {
    throw Error(ErrorCode::kInvalidInput, "rerank mode needs a first_stage file");
  }
  const ScoredList reranked =
      Rerank(record.profile, ReadFirstStage(*first_stage), index_->candidates(), cfg_.rank);
  std::vector<ScoredEntry> head(
      reranked.entries().begin(),
      reranked.entries().begin() +
          static_cast<std::ptrdiff_t>(std::min(limit, reranked.size())));
  out.list = ScoredList(std::move(head));
  return out;
}

json Service::SerializeLocked() const {
  json users = json::array();
  for (const auto& [id, slot] : users_) {
    std::lock_guard lock(slot->mu);
    users.push_back(slot->record.ToJson(true));
  }
  return json{{"users", std::move(users)}};
}

json Service::SerializeState() const {
  std::unique_lock lock(users_mu_);
  return SerializeLocked();
}

std::uint64_t Service::last_seq() const {
  if (log_) return log_->last_seq();
  std::lock_guard lock(seq_mu_);
  return memory_seq_;
}

void Service::WriteSnapshotNow() {
  if (!data_dir_) return;
  std::unique_lock lock(users_mu_);
  WriteSnapshot(*data_dir_, Snapshot{log_->last_seq(), SerializeLocked()});
}

void Service::MaybeSnapshot(std::uint64_t seq) {
  if (!data_dir_ || cfg_.snapshot_every == 0 || seq % cfg_.snapshot_every != 0) return;
  WriteSnapshotNow();
}

UserRecord Service::RecordFromJson(const json& j) const {
  UserLibrary library{j.at("user_id").get<std::string>(),
                      j.at("doc_ids").get<std::vector<std::string>>()};
  auto sentences = std::make_shared<const LibrarySentences>(
      GatherSentences(library, index_->corpus()));
  UserProfile profile = ProfileFromJson(j.at("profile"), sentences, cfg_.rank.ot);
  const auto saved = j.at("saved_doc_ids").get<std::vector<std::string>>();
  return UserRecord{std::move(library), std::move(profile),
                    std::set<std::string>(saved.begin(), saved.end()),
                    j.at("revision").get<std::uint64_t>()};
}

void Service::Recover() {
  const std::filesystem::path& dir = *data_dir_;
  std::uint64_t snapshot_seq = 0;
  if (auto snapshot = ReadSnapshot(dir)) {
    snapshot_seq = snapshot->seq;
    for (const json& u : snapshot->state.at("users")) {
      auto slot = std::make_shared<Slot>(RecordFromJson(u));
      users_.emplace(slot->record.library.user_id, std::move(slot));
    }
  }
  LogReadResult log = ReadEventLog(dir / EventLog::kLogFile);
  std::size_t replayed = 0;
  std::uint64_t last_seq = snapshot_seq;
  std::uintmax_t valid_bytes = 0;
  for (std::size_t i = 0; i < log.entries.size(); ++i) {
    const EventLogEntry& e = log.entries[i];
    if (e.seq > snapshot_seq) {
      auto it = users_.find(e.user_id);
      const UserRecord* current = it == users_.end() ? nullptr : &it->second->record;
      try {
        UserRecord next = Apply(current, e.user_id, e.action, e.payload);
        if (it == users_.end()) {
          users_.emplace(e.user_id, std::make_shared<Slot>(std::move(next)));
        } else {
          it->second->record = std::move(next);
        }
        ++replayed;
      } catch (const std::exception& ex) {
        log.halt_reason = "event seq " + std::to_string(e.seq) +
                          " does not apply: " + ex.what();
        log.halt_line = i + 1;
        log.discarded_lines += log.entries.size() - i;
        log.last_valid_seq = i == 0 ? 0 : log.entries[i - 1].seq;
        break;
      }
    }
    last_seq = std::max(last_seq, e.seq);
    valid_bytes = log.end_offsets[i];
  }
  recovery_report_ = log.ReportJson();
  recovery_report_["snapshot_seq"] = snapshot_seq;
  recovery_report_["replayed"] = replayed;
  recovery_report_["users"] = users_.size();
  log_ = std::make_unique<EventLog>(dir, last_seq, valid_bytes);
}

json Service::Health() const {
  std::shared_lock lock(users_mu_);
  return json{{"status", "ok"},
              {"corpus_size", index_->corpus().size()},
              {"inventory_size", index_->inventory().size()},
              {"candidate_count", index_->candidate_ids().size()},
              {"users", users_.size()}};
}

}  // namespace lace
