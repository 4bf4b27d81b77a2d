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

#ifndef LACE_RANKER_H_
#define LACE_RANKER_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lace/corpus.h"
#include "lace/ot.h"
#include "lace/profile.h"

namespace lace {

struct ScoredEntry {
  std::string doc_id;
  // Distance; smaller ranks higher.
  double score = 0.0;

  bool operator==(const ScoredEntry&) const = default;
};

// Ranked candidates, best first. Rank() output is ascending by
// (score, doc_id); Rerank() keeps the first-stage tail in its own order.
class ScoredList {
 public:
  ScoredList() = default;
  explicit ScoredList(std::vector<ScoredEntry> entries);

  // Sorts by (score, doc_id) and keeps the first k.
  static ScoredList FromScores(std::vector<ScoredEntry> entries, std::size_t k);

  const std::vector<ScoredEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const ScoredEntry& operator[](std::size_t i) const { return entries_[i]; }
  std::vector<std::string> DocIds() const;

  bool operator==(const ScoredList&) const = default;

 private:
  std::vector<ScoredEntry> entries_;
};

// Ordering used everywhere: ascending score, then ascending doc_id.
bool ScoreOrder(const ScoredEntry& a, const ScoredEntry& b);

struct RankConfig {
  // Share of the active profile rows scored against each candidate.
  double t_fraction = 0.2;
  // Number of first-stage entries re-scored by Rerank.
  std::size_t rerank_depth = 100;
  OtConfig ot;
  // Worker threads for candidate scoring; results do not depend on it.
  int num_threads = 1;

  void Validate() const;
};

// max(1, round(t_fraction * active_rows)).
std::size_t TopValueCount(std::size_t active_rows, double t_fraction);

// The TopValueCount rows of `active` closest (by minimum L2 distance to
// any candidate sentence) to the candidate, ties by row index.
Matrix SelectTopValues(const Matrix& active, const Matrix& sentences,
                       double t_fraction);

// OT distance between the selected value rows and the candidate sentences.
double ScoreCandidate(const Matrix& active, const Matrix& sentences,
                      const RankConfig& cfg);

// Top-k of `candidates` by ScoreCandidate over the given active rows.
ScoredList RankWithValues(const Matrix& active,
                          std::span<const Document* const> candidates,
                          const RankConfig& cfg, std::size_t k);

// RankWithValues over ActiveValues(profile).
ScoredList Rank(const UserProfile& profile,
                std::span<const Document* const> candidates,
                const RankConfig& cfg, std::size_t k);

// Re-scores the first min(rerank_depth, |first_stage|) entries and appends
// the rest unchanged. Throws kNotFound when a first-stage id is not among
// the candidates.
ScoredList Rerank(const UserProfile& profile, const ScoredList& first_stage,
                  std::span<const Document* const> candidates,
                  const RankConfig& cfg);

// Item-kNN baseline: minimum distance between the candidate's document
// embedding and those of the library documents.
double NeuKnnScore(const UserLibrary& library, const Corpus& corpus,
                   const Document& candidate);
ScoredList RankNeuKnn(const UserLibrary& library, const Corpus& corpus,
                      std::span<const Document* const> candidates,
                      std::size_t k);

inline constexpr double kDefaultTripletMargin = 1.0;

// max(w_pos - w_neg + delta, 0).
double TripletMarginLoss(double w_pos, double w_neg,
                         double delta = kDefaultTripletMargin);

// First-stage file: one {"doc_id","score"} per line, higher score more
// relevant. Entries are ordered by descending score (ties by doc_id) and
// converted to distances by rank position (0, 1, 2, ...).
ScoredList ParseFirstStage(std::istream& in);
ScoredList ReadFirstStage(const std::filesystem::path& path);

}  // namespace lace

#endif  // LACE_RANKER_H_
