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

#include "lace/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "lace/error.h"

namespace lace {
namespace {

using nlohmann::json;

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

template <typename Fn>
void ForEachJsonLine(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kLoad, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kLoad, path.string() + " line " +
                                        std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

double NdcgAtK(const ScoredList& ranking, const Judgment& judgment,
               std::size_t k) {
  if (k < 1) throw Error(ErrorCode::kInvalidInput, "k must be positive");
  const auto& relevant = judgment.relevant_doc_ids;
  if (relevant.empty()) return 0.0;
  double dcg = 0.0;
  const std::size_t depth = std::min(k, ranking.size());
  for (std::size_t i = 0; i < depth; ++i) {
    if (relevant.contains(ranking[i].doc_id)) {
      dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
  }
  double ideal = 0.0;
  const std::size_t ideal_hits = std::min(k, relevant.size());
  for (std::size_t i = 0; i < ideal_hits; ++i) {
    ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / ideal;
}

std::optional<double> RecallAtK(const ScoredList& ranking,
                                const Judgment& judgment, std::size_t k) {
  const auto& relevant = judgment.relevant_doc_ids;
  if (relevant.empty()) return std::nullopt;
  std::size_t hits = 0;
  const std::size_t depth = std::min(k, ranking.size());
  for (std::size_t i = 0; i < depth; ++i) {
    if (relevant.contains(ranking[i].doc_id)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double Mrr(const ScoredList& ranking, const Judgment& judgment) {
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (judgment.relevant_doc_ids.contains(ranking[i].doc_id)) {
      return 1.0 / static_cast<double>(i + 1);
    }
  }
  return 0.0;
}

DocMatcher SubstringMatcher(std::string text) {
  return [needle = Lower(std::move(text))](const Document& d) {
    if (needle.empty()) return false;
    if (Lower(d.title).find(needle) != std::string::npos) return true;
    return std::any_of(d.sentences.begin(), d.sentences.end(),
                       [&](const std::string& s) {
                         return Lower(s).find(needle) != std::string::npos;
                       });
  };
}

std::optional<double> ConceptRecallAtK(
    const ScoredList& ranking, const DocMatcher& matcher,
    std::span<const Document* const> all_candidates, std::size_t k,
    ConceptRecallNorm norm) {
  std::unordered_map<std::string_view, bool> matches;
  std::size_t total = 0;
  for (const Document* d : all_candidates) {
    const bool m = matcher(*d);
    matches.emplace(d->doc_id, m);
    if (m) ++total;
  }
  const std::size_t denom =
      norm == ConceptRecallNorm::kCapped ? std::min(total, k) : total;
  if (denom == 0) return std::nullopt;
  std::size_t hits = 0;
  const std::size_t depth = std::min(k, ranking.size());
  for (std::size_t i = 0; i < depth; ++i) {
    auto it = matches.find(ranking[i].doc_id);
    if (it != matches.end() && it->second) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(denom);
}

double PairwiseAccuracy(const std::unordered_map<std::string, double>& scores,
                        std::span<const RatedPair> pairs) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kInvalidInput, "pairwise_accuracy needs pairs");
  }
  auto lookup = [&](const std::string& id) {
    auto it = scores.find(id);
    if (it == scores.end()) {
      throw Error(ErrorCode::kNotFound, "no score for doc_id '" + id + "'");
    }
    return it->second;
  };
  double correct = 0.0;
  for (const RatedPair& p : pairs) {
    const double hi = lookup(p.doc_hi);
    const double lo = lookup(p.doc_lo);
    if (hi < lo) {
      correct += 1.0;
    } else if (hi == lo) {
      correct += 0.5;
    }
  }
  return correct / static_cast<double>(pairs.size());
}

double KendallRankLoss(const ScoredList& system_ranking,
                       std::span<const std::string> reference_ranking) {
  std::unordered_map<std::string_view, std::size_t> system_pos;
  for (std::size_t i = 0; i < system_ranking.size(); ++i) {
    system_pos.emplace(system_ranking[i].doc_id, i);
  }
  // System positions of shared items, in reference order.
  std::vector<std::size_t> seq;
  for (const std::string& id : reference_ranking) {
    auto it = system_pos.find(id);
    if (it != system_pos.end()) seq.push_back(it->second);
  }
  if (seq.size() < 2) {
    throw Error(ErrorCode::kInvalidInput,
                "kendall_rank_loss needs at least two shared items");
  }
  std::size_t discordant = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    for (std::size_t j = i + 1; j < seq.size(); ++j) {
      if (seq[i] > seq[j]) ++discordant;
    }
  }
  const double pairs = static_cast<double>(seq.size() * (seq.size() - 1) / 2);
  return static_cast<double>(discordant) / pairs;
}

double PairedTTestPValue(std::span<const double> before,
                         std::span<const double> after) {
  if (before.size() != after.size()) {
    throw Error(ErrorCode::kInvalidInput, "paired samples differ in length");
  }
  const std::size_t n = before.size();
  if (n < 2) {
    throw Error(ErrorCode::kInvalidInput, "paired t-test needs two or more pairs");
  }
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = after[i] - before[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) return mean == 0.0 ? 1.0 : 0.0;
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

std::vector<Judgment> ReadJudgmentsJsonl(const std::filesystem::path& path) {
  std::vector<Judgment> out;
  ForEachJsonLine(path, [&](const json& j) {
    Judgment jd;
    jd.user_id = j.at("user_id").get<std::string>();
    for (const auto& id : j.at("relevant_doc_ids")) {
      jd.relevant_doc_ids.insert(id.get<std::string>());
    }
    out.push_back(std::move(jd));
  });
  return out;
}

std::vector<RatedPair> ReadRatedPairsJsonl(const std::filesystem::path& path) {
  std::vector<RatedPair> out;
  ForEachJsonLine(path, [&](const json& j) {
    RatedPair p;
    p.user_id = j.at("user_id").get<std::string>();
    p.doc_hi = j.at("hi").get<std::string>();
    p.doc_lo = j.at("lo").get<std::string>();
    const std::string gap = j.value("gap", std::string("easy"));
    if (gap != "easy" && gap != "hard") {
      throw Error(ErrorCode::kLoad, "unknown pair gap '" + gap + "'");
    }
    p.gap = gap == "hard" ? PairGap::kHard : PairGap::kEasy;
    if (p.doc_hi == p.doc_lo) {
      throw Error(ErrorCode::kLoad, "rated pair compares a document with itself");
    }
    out.push_back(std::move(p));
  });
  return out;
}

}  // namespace lace
