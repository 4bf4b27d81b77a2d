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

// Concept profiles: retrieval of human-readable concepts for a user's
// documents, personalized concept values from an OT assignment of the user's
// sentences to those concepts, and the edit/selection interactions.

#ifndef LACE_PROFILE_H_
#define LACE_PROFILE_H_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lace/corpus.h"
#include "lace/ot.h"

namespace lace {

enum class ConceptState { kNeutral, kPositive, kNegative };
enum class ConceptSource { kRetrieved, kUserAdded };
enum class Polarity { kPositive, kNegative };

std::string_view ConceptStateName(ConceptState state);
ConceptState ParseConceptState(std::string_view name);
std::string_view ConceptSourceName(ConceptSource source);
ConceptSource ParseConceptSource(std::string_view name);
std::string_view PolarityName(Polarity polarity);
Polarity ParsePolarity(std::string_view name);

struct UserLibrary {
  std::string user_id;
  std::vector<std::string> doc_ids;
};

struct SentenceRef {
  std::string doc_id;
  std::size_t sentence_index = 0;

  bool operator==(const SentenceRef&) const = default;
};

// Stacked sentence embeddings of a user's library, in library order.
struct LibrarySentences {
  Matrix embeddings;
  std::vector<SentenceRef> index;
};

// Throws kInvalidInput for an empty library, kNotFound for unknown docs.
LibrarySentences GatherSentences(const UserLibrary& library,
                                 const Corpus& corpus);

struct ProfileConcept {
  std::string concept_id;
  std::string text;
  Vector embedding;
  ConceptState state = ConceptState::kNeutral;
  ConceptSource source = ConceptSource::kRetrieved;
  // Present iff source is kRetrieved.
  std::optional<double> retrieval_distance;
};

struct PrefetchedConcept {
  Concept entry;
  double distance = 0.0;
};

// Nearest inventory concept for every library sentence, merged by concept
// keeping the smallest distance, ascending by (distance, concept_id).
std::vector<PrefetchedConcept> PrefetchConcepts(
    const LibrarySentences& sentences, const ConceptInventory& inventory);

struct ConceptValues {
  // P x E, row i is the plan-weighted mean of sentences for concept i.
  Matrix values;
  // S x P sentence-to-concept plan.
  TransportPlan plan;
  // Rows whose plan column carried (almost) no mass and fell back to the
  // concept's own embedding.
  std::vector<bool> fallback;
};

// `concepts` is P x E, `sentences` S x E.
ConceptValues ComputeValues(const Matrix& concepts, const Matrix& sentences,
                            const OtConfig& cfg);

// Immutable profile value. Edits and selections return new profiles; the
// library sentences are shared between a profile and its descendants.
class UserProfile {
 public:
  UserProfile(std::string user_id, std::vector<ProfileConcept> concepts,
              std::shared_ptr<const LibrarySentences> sentences,
              const OtConfig& cfg);

  const std::string& user_id() const { return user_id_; }
  std::span<const ProfileConcept> concepts() const { return concepts_; }
  std::size_t size() const { return concepts_.size(); }
  const Matrix& values() const { return values_->values; }
  const TransportPlan& plan() const { return values_->plan; }
  const std::vector<bool>& fallback_rows() const { return values_->fallback; }
  const std::vector<SentenceRef>& sentence_index() const {
    return sentences_->index;
  }
  const LibrarySentences& sentences() const { return *sentences_; }
  const std::shared_ptr<const LibrarySentences>& shared_sentences() const {
    return sentences_;
  }
  const OtConfig& ot_config() const { return cfg_; }

  // Index of the concept with this id, if present.
  std::optional<std::size_t> IndexOf(std::string_view concept_id) const;
  // P x E matrix of concept embeddings, in profile order.
  Matrix ConceptEmbeddings() const;

  // Same concepts and values, different states. Throws kInvalidInput when
  // the size differs.
  UserProfile WithStates(std::span<const ConceptState> states) const;

 private:
  UserProfile(std::string user_id, std::vector<ProfileConcept> concepts,
              std::shared_ptr<const LibrarySentences> sentences,
              const OtConfig& cfg,
              std::shared_ptr<const ConceptValues> values);

  std::string user_id_;
  std::vector<ProfileConcept> concepts_;
  std::shared_ptr<const LibrarySentences> sentences_;
  OtConfig cfg_;
  std::shared_ptr<const ConceptValues> values_;
};

inline constexpr double kDefaultRetainFraction = 0.5;

// Keeps ceil(retain_fraction * |prefetched|) concepts with the smallest
// minimum L2 distance to any library sentence (ties by concept_id), then
// computes their values.
UserProfile BuildProfile(const std::string& user_id,
                         std::shared_ptr<const LibrarySentences> sentences,
                         std::span<const PrefetchedConcept> prefetched,
                         double retain_fraction, const OtConfig& cfg);

// Retrieval plus construction in one call.
UserProfile BuildProfile(const UserLibrary& library, const Corpus& corpus,
                         const ConceptInventory& inventory,
                         double retain_fraction, const OtConfig& cfg);

// Id assigned to a user-added concept; unique within `profile`.
std::string UserConceptId(const UserProfile& profile, std::string_view text);

// Appends a user-added concept and recomputes values. Throws kDuplicate when
// the normalized text matches an existing concept, kInvalidInput for blank
// text or a wrong-sized embedding.
UserProfile AddConcept(const UserProfile& profile, std::string_view text,
                       const Vector& embedding);

// Throws kNotFound for an unknown id, kInvalidState when removing the last
// concept.
UserProfile RemoveConcept(const UserProfile& profile,
                          std::string_view concept_id);

// Remove followed by add; the renamed concept moves to the end as a
// user-added concept.
UserProfile RenameConcept(const UserProfile& profile,
                          std::string_view concept_id, std::string_view new_text,
                          const Vector& embedding);

// Sets the state of every listed concept. Positive and negative are
// exclusive per concept. Throws kNotFound for unknown ids.
UserProfile Select(const UserProfile& profile,
                   std::span<const std::string> concept_ids,
                   Polarity polarity);

UserProfile ClearSelection(const UserProfile& profile);

// Rows used for ranking: the positive rows if any exist, else every row not
// marked negative. Throws kEmptyActiveSet when nothing remains.
std::vector<Eigen::Index> ActiveRows(const UserProfile& profile);
Matrix ActiveValues(const UserProfile& profile);

// {user_id, concepts:[{concept_id,text,state,source,retrieval_distance}]}.
// With `include_values`, each concept also carries its embedding and the
// object gains "values" and "plan" matrices (row-major nested arrays).
nlohmann::json ProfileToJson(const UserProfile& profile, bool include_values);

// Inverse of ProfileToJson(profile, true) given the library sentences.
// Values and plan are recomputed, not read.
UserProfile ProfileFromJson(const nlohmann::json& j,
                            std::shared_ptr<const LibrarySentences> sentences,
                            const OtConfig& cfg);

}  // namespace lace

#endif  // LACE_PROFILE_H_
