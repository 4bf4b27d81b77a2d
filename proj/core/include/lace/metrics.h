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

#ifndef LACE_METRICS_H_
#define LACE_METRICS_H_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lace/corpus.h"
#include "lace/ranker.h"

namespace lace {

struct Judgment {
  std::string user_id;
  std::unordered_set<std::string> relevant_doc_ids;
};

enum class PairGap { kEasy, kHard };

struct RatedPair {
  std::string user_id;
  std::string doc_hi;
  std::string doc_lo;
  PairGap gap = PairGap::kEasy;
};

// Binary-gain NDCG with a log2(rank + 1) discount; 0 without relevant items.
double NdcgAtK(const ScoredList& ranking, const Judgment& judgment, std::size_t k);

// nullopt when the judgment has no relevant items (excluded from averages).
std::optional<double> RecallAtK(const ScoredList& ranking,
                                const Judgment& judgment, std::size_t k);

// Reciprocal rank of the first relevant item; 0 when none.
double Mrr(const ScoredList& ranking, const Judgment& judgment);

using DocMatcher = std::function<bool(const Document&)>;

// Case-insensitive substring match of `text` against title and sentences.
DocMatcher SubstringMatcher(std::string text);

enum class ConceptRecallNorm {
  // |matches in top-k| / min(|matches overall|, k)
  kCapped,
  // |matches in top-k| / |matches overall|
  kUncapped,
};

// nullopt when no candidate matches.
std::optional<double> ConceptRecallAtK(
    const ScoredList& ranking, const DocMatcher& matcher,
    std::span<const Document* const> all_candidates, std::size_t k,
    ConceptRecallNorm norm = ConceptRecallNorm::kCapped);

// Fraction of pairs with score(hi) < score(lo) (scores are distances);
// ties count one half. Throws kNotFound for unscored documents.
double PairwiseAccuracy(const std::unordered_map<std::string, double>& scores,
                        std::span<const RatedPair> pairs);

// Normalized Kendall tau distance over items present in both rankings:
// discordant pairs / comparable pairs. Throws kInvalidInput when fewer than
// two items overlap.
double KendallRankLoss(const ScoredList& system_ranking,
                       std::span<const std::string> reference_ranking);

// Two-sided paired t-test p-value. Identical samples give 1; a nonzero
// constant difference gives 0.
double PairedTTestPValue(std::span<const double> before,
                         std::span<const double> after);

std::vector<Judgment> ReadJudgmentsJsonl(const std::filesystem::path& path);
std::vector<RatedPair> ReadRatedPairsJsonl(const std::filesystem::path& path);

}  // namespace lace

#endif  // LACE_METRICS_H_
