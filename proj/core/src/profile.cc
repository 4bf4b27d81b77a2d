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

#include "lace/profile.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "lace/error.h"

namespace lace {
namespace {

using nlohmann::json;

constexpr double kMinColumnMass = 1e-12;

double MinDistanceToRows(const Vector& point, const Matrix& rows) {
  return (rows.rowwise() - point.transpose()).rowwise().norm().minCoeff();
}

json MatrixToJson(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

json VectorToJson(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

void CheckEmbedding(const UserProfile& profile, const Vector& embedding) {
  if (embedding.size() != profile.sentences().embeddings.cols()) {
    throw Error(ErrorCode::kValidation,
                "concept embedding has dimension " +
                    std::to_string(embedding.size()) + ", profile uses " +
                    std::to_string(profile.sentences().embeddings.cols()));
  }
  if (!embedding.allFinite()) {
    throw Error(ErrorCode::kValidation, "concept embedding is not finite");
  }
}

std::vector<ProfileConcept> WithoutConcept(const UserProfile& profile,
                                           std::string_view concept_id) {
  const auto idx = profile.IndexOf(concept_id);
  if (!idx) {
    throw Error(ErrorCode::kNotFound,
                "unknown concept_id '" + std::string(concept_id) + "'");
  }
  std::vector<ProfileConcept> out(profile.concepts().begin(),
                                  profile.concepts().end());
  out.erase(out.begin() + static_cast<std::ptrdiff_t>(*idx));
  return out;
}

std::vector<ProfileConcept> WithAddedConcept(
    const UserProfile& profile, std::vector<ProfileConcept> concepts,
    std::string_view text, const Vector& embedding) {
  const std::string norm = NormalizeText(text);
  if (norm.empty()) {
    throw Error(ErrorCode::kInvalidInput, "concept text is empty");
  }
  CheckEmbedding(profile, embedding);
  std::unordered_set<std::string> ids;
  for (const ProfileConcept& c : concepts) {
    if (NormalizeText(c.text) == norm) {
      throw Error(ErrorCode::kDuplicate,
                  "profile already has concept '" + c.text + "'",
                  c.concept_id);
    }
    ids.insert(c.concept_id);
  }
  std::string id = "user:" + norm;
  for (int n = 2; ids.contains(id); ++n) {
    id = "user:" + norm + "~" + std::to_string(n);
  }
  ProfileConcept added;
  added.concept_id = std::move(id);
  auto begin = text.find_first_not_of(" \t\r\n");
  auto end = text.find_last_not_of(" \t\r\n");
  added.text = std::string(text.substr(begin, end - begin + 1));
  added.embedding = embedding;
  added.source = ConceptSource::kUserAdded;
  concepts.push_back(std::move(added));
  return concepts;
}

}  // namespace

std::string_view ConceptStateName(ConceptState state) {
  switch (state) {
    case ConceptState::kNeutral:
      return "neutral";
    case ConceptState::kPositive:
      return "positive";
    case ConceptState::kNegative:
      return "negative";
  }
  return "neutral";
}

ConceptState ParseConceptState(std::string_view name) {
  if (name == "neutral") return ConceptState::kNeutral;
  if (name == "positive") return ConceptState::kPositive;
  if (name == "negative") return ConceptState::kNegative;
  throw Error(ErrorCode::kInvalidInput, "unknown state '" + std::string(name) + "'");
}

std::string_view ConceptSourceName(ConceptSource source) {
  return source == ConceptSource::kRetrieved ? "retrieved" : "user_added";
}

ConceptSource ParseConceptSource(std::string_view name) {
  if (name == "retrieved") return ConceptSource::kRetrieved;
  if (name == "user_added") return ConceptSource::kUserAdded;
  throw Error(ErrorCode::kInvalidInput, "unknown source '" + std::string(name) + "'");
}

std::string_view PolarityName(Polarity polarity) {
  return polarity == Polarity::kPositive ? "positive" : "negative";
}

Polarity ParsePolarity(std::string_view name) {
  if (name == "positive") return Polarity::kPositive;
  if (name == "negative") return Polarity::kNegative;
  throw Error(ErrorCode::kInvalidInput,
              "unknown polarity '" + std::string(name) + "'");
}

LibrarySentences GatherSentences(const UserLibrary& library,
                                 const Corpus& corpus) {
  if (library.doc_ids.empty()) {
    throw Error(ErrorCode::kInvalidInput,
                "library of user '" + library.user_id + "' is empty");
  }
  std::vector<const Document*> docs;
  Eigen::Index rows = 0;
  for (const std::string& id : library.doc_ids) {
    docs.push_back(&corpus.Get(id));
    rows += docs.back()->sentence_embeddings.rows();
  }
  LibrarySentences out;
  out.embeddings.resize(rows, corpus.dim());
  Eigen::Index r = 0;
  for (const Document* d : docs) {
    for (Eigen::Index s = 0; s < d->sentence_embeddings.rows(); ++s, ++r) {
      out.embeddings.row(r) = d->sentence_embeddings.row(s);
      out.index.push_back({d->doc_id, static_cast<std::size_t>(s)});
    }
  }
  return out;
}

std::vector<PrefetchedConcept> PrefetchConcepts(
    const LibrarySentences& sentences, const ConceptInventory& inventory) {
  if (sentences.embeddings.rows() == 0) {
    throw Error(ErrorCode::kInvalidInput, "cannot prefetch for an empty library");
  }
  if (inventory.size() == 0) {
    throw Error(ErrorCode::kInvalidInput, "concept inventory is empty");
  }
  if (inventory.dim() != sentences.embeddings.cols()) {
    throw Error(ErrorCode::kValidation,
                "inventory dimension " + std::to_string(inventory.dim()) +
                    " differs from sentence dimension " +
                    std::to_string(sentences.embeddings.cols()));
  }
  const Matrix& k = inventory.embedding_matrix();
  const auto concepts = inventory.concepts();
  // concept index -> best distance
  std::map<std::size_t, double> best;
  for (Eigen::Index s = 0; s < sentences.embeddings.rows(); ++s) {
    const Vector dists =
        (k.rowwise() - sentences.embeddings.row(s)).rowwise().norm();
    std::size_t arg = 0;
    for (std::size_t c = 1; c < concepts.size(); ++c) {
      const double d = dists[static_cast<Eigen::Index>(c)];
      const double cur = dists[static_cast<Eigen::Index>(arg)];
      if (d < cur || (d == cur && concepts[c].concept_id < concepts[arg].concept_id)) {
        arg = c;
      }
    }
    const double d = dists[static_cast<Eigen::Index>(arg)];
    auto [it, inserted] = best.emplace(arg, d);
    if (!inserted) it->second = std::min(it->second, d);
  }
  std::vector<PrefetchedConcept> out;
  out.reserve(best.size());
  for (const auto& [idx, d] : best) out.push_back({concepts[idx], d});
  std::sort(out.begin(), out.end(),
            [](const PrefetchedConcept& x, const PrefetchedConcept& y) {
              if (x.distance != y.distance) return x.distance < y.distance;
              return x.entry.concept_id < y.entry.concept_id;
            });
  return out;
}

ConceptValues ComputeValues(const Matrix& concepts, const Matrix& sentences,
                            const OtConfig& cfg) {
  if (concepts.rows() < 1 || sentences.rows() < 1) {
    throw Error(ErrorCode::kInvalidInput,
                "compute_values needs at least one concept and one sentence");
  }
  const CostMatrix cost = PairwiseL2(sentences, concepts);
  TransportPlan plan = Sinkhorn(
      cost, MarginalPair::Uniform(sentences.rows(), concepts.rows()), cfg);
  const Matrix& q = plan.entries();
  Matrix values(concepts.rows(), sentences.cols());
  std::vector<bool> fallback(static_cast<std::size_t>(concepts.rows()), false);
  for (Eigen::Index i = 0; i < concepts.rows(); ++i) {
    const double mass = q.col(i).sum();
    if (mass < kMinColumnMass) {
      values.row(i) = concepts.row(i);
      fallback[static_cast<std::size_t>(i)] = true;
      continue;
    }
    values.row(i) = (q.col(i).transpose() * sentences) / mass;
  }
  return ConceptValues{std::move(values), std::move(plan), std::move(fallback)};
}

UserProfile::UserProfile(std::string user_id,
                         std::vector<ProfileConcept> concepts,
                         std::shared_ptr<const LibrarySentences> sentences,
                         const OtConfig& cfg)
    : user_id_(std::move(user_id)),
      concepts_(std::move(concepts)),
      sentences_(std::move(sentences)),
      cfg_(cfg) {
  if (concepts_.empty()) {
    throw Error(ErrorCode::kInvalidState, "a profile needs at least one concept");
  }
  if (!sentences_ || sentences_->embeddings.rows() == 0) {
    throw Error(ErrorCode::kInvalidInput, "a profile needs library sentences");
  }
  for (const ProfileConcept& c : concepts_) {
    if (c.retrieval_distance.has_value() !=
        (c.source == ConceptSource::kRetrieved)) {
      throw Error(ErrorCode::kInvalidInput,
                  "concept '" + c.concept_id +
                      "': retrieval_distance must be set iff retrieved");
    }
  }
  values_ = std::make_shared<const ConceptValues>(
      ComputeValues(ConceptEmbeddings(), sentences_->embeddings, cfg_));
}

UserProfile::UserProfile(std::string user_id,
                         std::vector<ProfileConcept> concepts,
                         std::shared_ptr<const LibrarySentences> sentences,
                         const OtConfig& cfg,
                         std::shared_ptr<const ConceptValues> values)
    : user_id_(std::move(user_id)),
      concepts_(std::move(concepts)),
      sentences_(std::move(sentences)),
      cfg_(cfg),
      values_(std::move(values)) {}

std::optional<std::size_t> UserProfile::IndexOf(
    std::string_view concept_id) const {
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    if (concepts_[i].concept_id == concept_id) return i;
  }
  return std::nullopt;
}

Matrix UserProfile::ConceptEmbeddings() const {
  Matrix out(static_cast<Eigen::Index>(concepts_.size()),
             sentences_->embeddings.cols());
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    if (concepts_[i].embedding.size() != out.cols()) {
      throw Error(ErrorCode::kValidation,
                  "concept '" + concepts_[i].concept_id +
                      "' embedding dimension differs from sentences");
    }
    out.row(static_cast<Eigen::Index>(i)) = concepts_[i].embedding.transpose();
  }
  return out;
}

UserProfile UserProfile::WithStates(std::span<const ConceptState> states) const {
  if (states.size() != concepts_.size()) {
    throw Error(ErrorCode::kInvalidInput, "state count differs from profile size");
  }
  std::vector<ProfileConcept> concepts = concepts_;
  for (std::size_t i = 0; i < states.size(); ++i) concepts[i].state = states[i];
  return UserProfile(user_id_, std::move(concepts), sentences_, cfg_, values_);
}

UserProfile BuildProfile(const std::string& user_id,
                         std::shared_ptr<const LibrarySentences> sentences,
                         std::span<const PrefetchedConcept> prefetched,
                         double retain_fraction, const OtConfig& cfg) {
  if (prefetched.empty()) {
    throw Error(ErrorCode::kInvalidInput, "no prefetched concepts");
  }
  if (!(retain_fraction > 0.0 && retain_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "retain_fraction must be in (0, 1]");
  }
  struct Ranked {
    const PrefetchedConcept* source;
    double distance;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(prefetched.size());
  for (const PrefetchedConcept& p : prefetched) {
    if (p.entry.embedding.size() != sentences->embeddings.cols()) {
      throw Error(ErrorCode::kValidation,
                  "prefetched concept '" + p.entry.concept_id +
                      "' has the wrong dimension");
    }
    ranked.push_back({&p, MinDistanceToRows(p.entry.embedding,
                                            sentences->embeddings)});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& x, const Ranked& y) {
    if (x.distance != y.distance) return x.distance < y.distance;
    return x.source->entry.concept_id < y.source->entry.concept_id;
  });
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(
             retain_fraction * static_cast<double>(prefetched.size()) - 1e-9)));
  std::vector<ProfileConcept> concepts;
  for (std::size_t i = 0; i < std::min(keep, ranked.size()); ++i) {
    const Concept& c = ranked[i].source->entry;
    concepts.push_back({c.concept_id, c.text, c.embedding, ConceptState::kNeutral,
                        ConceptSource::kRetrieved, ranked[i].distance});
  }
  return UserProfile(user_id, std::move(concepts), std::move(sentences), cfg);
}

UserProfile BuildProfile(const UserLibrary& library, const Corpus& corpus,
                         const ConceptInventory& inventory,
                         double retain_fraction, const OtConfig& cfg) {
  auto sentences = std::make_shared<const LibrarySentences>(
      GatherSentences(library, corpus));
  const auto prefetched = PrefetchConcepts(*sentences, inventory);
  return BuildProfile(library.user_id, std::move(sentences), prefetched,
                      retain_fraction, cfg);
}

std::string UserConceptId(const UserProfile& profile, std::string_view text) {
  std::vector<ProfileConcept> concepts(profile.concepts().begin(),
                                       profile.concepts().end());
  return WithAddedConcept(profile, std::move(concepts), text,
                          Vector::Zero(profile.sentences().embeddings.cols()))
      .back()
      .concept_id;
}

UserProfile AddConcept(const UserProfile& profile, std::string_view text,
                       const Vector& embedding) {
  std::vector<ProfileConcept> concepts(profile.concepts().begin(),
                                       profile.concepts().end());
  return UserProfile(profile.user_id(),
                     WithAddedConcept(profile, std::move(concepts), text, embedding),
                     profile.shared_sentences(), profile.ot_config());
}

UserProfile RemoveConcept(const UserProfile& profile,
                          std::string_view concept_id) {
  auto concepts = WithoutConcept(profile, concept_id);
  if (concepts.empty()) {
    throw Error(ErrorCode::kInvalidState,
                "cannot remove the last concept of a profile");
  }
  return UserProfile(profile.user_id(), std::move(concepts),
                     profile.shared_sentences(), profile.ot_config());
}

UserProfile RenameConcept(const UserProfile& profile,
                          std::string_view concept_id, std::string_view new_text,
                          const Vector& embedding) {
  // Values are recomputed once, after the add; the intermediate removal is
  // never observable.
  auto concepts = WithoutConcept(profile, concept_id);
  return UserProfile(profile.user_id(),
                     WithAddedConcept(profile, std::move(concepts), new_text, embedding),
                     profile.shared_sentences(), profile.ot_config());
}

UserProfile Select(const UserProfile& profile,
                   std::span<const std::string> concept_ids, Polarity polarity) {
  std::vector<ConceptState> states;
  for (const ProfileConcept& c : profile.concepts()) states.push_back(c.state);
  for (const std::string& id : concept_ids) {
    const auto idx = profile.IndexOf(id);
    if (!idx) {
      throw Error(ErrorCode::kNotFound, "unknown concept_id '" + id + "'");
    }
    states[*idx] = polarity == Polarity::kPositive ? ConceptState::kPositive
                                                   : ConceptState::kNegative;
  }
  return profile.WithStates(states);
}

UserProfile ClearSelection(const UserProfile& profile) {
  const std::vector<ConceptState> states(profile.size(), ConceptState::kNeutral);
  return profile.WithStates(states);
}

std::vector<Eigen::Index> ActiveRows(const UserProfile& profile) {
  std::vector<Eigen::Index> positive;
  std::vector<Eigen::Index> not_negative;
  const auto concepts = profile.concepts();
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (concepts[i].state == ConceptState::kPositive) positive.push_back(row);
    if (concepts[i].state != ConceptState::kNegative) not_negative.push_back(row);
  }
  if (!positive.empty()) return positive;
  if (not_negative.empty()) {
    throw Error(ErrorCode::kEmptyActiveSet,
                "every profile concept is negatively selected; relax the "
                "selection to get recommendations");
  }
  return not_negative;
}

Matrix ActiveValues(const UserProfile& profile) {
  const auto rows = ActiveRows(profile);
  Matrix out(static_cast<Eigen::Index>(rows.size()), profile.values().cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = profile.values().row(rows[i]);
  }
  return out;
}

json ProfileToJson(const UserProfile& profile, bool include_values) {
  json concepts = json::array();
  for (const ProfileConcept& c : profile.concepts()) {
    json item = {{"concept_id", c.concept_id},
                 {"text", c.text},
                 {"state", std::string(ConceptStateName(c.state))},
                 {"source", std::string(ConceptSourceName(c.source))},
                 {"retrieval_distance", nullptr}};
    if (c.retrieval_distance) item["retrieval_distance"] = *c.retrieval_distance;
    if (include_values) item["embedding"] = VectorToJson(c.embedding);
    concepts.push_back(std::move(item));
  }
  json out = {{"user_id", profile.user_id()}, {"concepts", std::move(concepts)}};
  if (include_values) {
    out["values"] = MatrixToJson(profile.values());
    out["plan"] = MatrixToJson(profile.plan().entries());
  }
  return out;
}

UserProfile ProfileFromJson(const json& j,
                            std::shared_ptr<const LibrarySentences> sentences,
                            const OtConfig& cfg) {
  std::vector<ProfileConcept> concepts;
  for (const json& item : j.at("concepts")) {
    ProfileConcept c;
    c.concept_id = item.at("concept_id").get<std::string>();
    c.text = item.at("text").get<std::string>();
    c.state = ParseConceptState(item.at("state").get<std::string>());
    c.source = ParseConceptSource(item.at("source").get<std::string>());
    if (!item.at("retrieval_distance").is_null()) {
      c.retrieval_distance = item.at("retrieval_distance").get<double>();
    }
    const auto v = item.at("embedding").get<std::vector<double>>();
    c.embedding = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    concepts.push_back(std::move(c));
  }
  return UserProfile(j.at("user_id").get<std::string>(), std::move(concepts),
                     std::move(sentences), cfg);
}

}  // namespace lace
