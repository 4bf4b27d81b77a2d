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

// Clustered synthetic worlds with known topical structure, used by the
// simulations, the acceptance suite and the benchmarks. Every value is
// rounded to f32 so that a world written to disk and loaded back is
// identical to the in-memory one.

#ifndef LACE_SYNTHETIC_H_
#define LACE_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "lace/corpus.h"
#include "lace/metrics.h"
#include "lace/profile.h"
#include "lace/simulation.h"

namespace lace {

struct SyntheticSpec {
  int dim = 32;
  int clusters = 8;
  int facets_per_cluster = 3;
  int distractor_concepts = 40;
  int users = 40;
  int candidates = 2000;
  // Each user draws this many clusters and `facets_per_interest` facets in
  // each of them.
  int interests_per_user = 3;
  int facets_per_interest = 2;
  // Library documents on the user's primary facet, and on each other facet.
  int primary_docs = 4;
  int secondary_docs = 1;
  int library_sentences = 4;
  int min_candidate_sentences = 3;
  int max_candidate_sentences = 6;
  // Held-out candidates generated around each library document's topic.
  // They form the user's relevant set.
  int heldout_per_doc = 2;
  // Per-dimension standard deviations.
  double cluster_spread = 1.0;
  double facet_spread = 0.35;
  // Offset of a document's topic from its facet center.
  double topic_spread = 0.2;
  // Offset of a held-out candidate's topic from its library document's topic.
  double heldout_spread = 0.05;
  double sentence_noise = 0.08;
  double synonym_noise = 0.03;
  std::uint64_t seed = 7;
};

struct SyntheticUser {
  UserLibrary library;
  // Inventory concept of the user's primary facet.
  std::string primary_concept_id;
  Judgment judgment;
  // Replacement placed on a facet of a cluster the user has no interest in.
  std::string antonym_text;
  Vector antonym_embedding;
};

struct SyntheticWorld {
  SyntheticSpec spec;
  Corpus corpus;
  ConceptInventory inventory;
  std::vector<std::string> candidate_ids;
  std::vector<SyntheticUser> users;
  // doc_id -> concept_id of the facet it was drawn from.
  std::unordered_map<std::string, std::string> doc_facet;
  // concept_id -> embedding of its near-identical replacement.
  std::unordered_map<std::string, Vector> synonym_embeddings;

  std::vector<const Document*> Candidates() const;
  // Replacement text and embedding for `concept_id`.
  std::pair<std::string, Vector> Synonym(const std::string& concept_id) const;
  // Matches documents drawn from the facet of `concept_id`.
  DocMatcher FacetMatcher(const std::string& concept_id) const;
};

// Concept text of facet f of cluster c, e.g. "theme 3 facet 1".
std::string FacetText(int cluster, int facet);

std::string SynonymText(const std::string& concept_text);

SyntheticWorld GenerateSyntheticWorld(const SyntheticSpec& spec);

// Concept edited in the synonym trials: the primary concept when the profile
// retained it, otherwise the profile's first concept.
std::string EditTarget(const UserProfile& profile,
                       const std::string& primary_concept_id);

// Concept selected in the trial of the user at `user_index`: profile
// concepts are taken in turn so that every profile position is exercised.
std::string SelectionTarget(const UserProfile& profile, std::size_t user_index);

// Profiles of the first `max_users` users (all when 0), in user order.
std::vector<UserProfile> BuildUserProfiles(const SyntheticWorld& world,
                                           double retain_fraction,
                                           const OtConfig& cfg,
                                           std::size_t max_users = 0);

// Selection trials on SelectionTarget concepts with the default matcher.
SimulationReport RunSelectionProtocol(const SyntheticWorld& world,
                                      std::span<const UserProfile> profiles,
                                      Polarity polarity, const RankConfig& cfg,
                                      std::size_t k = 20,
                                      ConceptRecallNorm norm = ConceptRecallNorm::kCapped);

// Renames each EditTarget concept to its synonym, or with `antonym` to the
// user's contrast text, and compares recall on the user's judgment.
SimulationReport RunSynonymProtocol(const SyntheticWorld& world,
                                    std::span<const UserProfile> profiles,
                                    bool antonym, const RankConfig& cfg,
                                    std::size_t k = 20);

// documents.jsonl, embeddings.bin, inventory.jsonl, candidates.txt,
// users.jsonl, judgments.jsonl, synonyms.jsonl and text_cache.jsonl. The text cache holds
// the embeddings of every synonym and antonym text.
void WriteSyntheticWorld(const SyntheticWorld& world,
                         const std::filesystem::path& dir);

// Inverse of WriteSyntheticWorld. The spec keeps its defaults and doc_facet
// stays empty; everything the protocols read is restored exactly.
SyntheticWorld LoadSyntheticWorld(const std::filesystem::path& dir);

}  // namespace lace

#endif  // LACE_SYNTHETIC_H_
