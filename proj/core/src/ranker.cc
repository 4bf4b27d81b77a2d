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

#include "lace/ranker.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "lace/error.h"

namespace lace {
namespace {

using nlohmann::json;

// Fills scores[i] = fn(i) for i in [0, n) on `threads` workers. Each slot is
// written by exactly one worker, so the output is independent of
// scheduling.
template <typename Fn>
void ParallelFor(std::size_t n, int threads, Fn fn) {
  const auto workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([=, &fn] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
}

}  // namespace

bool ScoreOrder(const ScoredEntry& a, const ScoredEntry& b) {
  if (a.score != b.score) return a.score < b.score;
  return a.doc_id < b.doc_id;
}

ScoredList::ScoredList(std::vector<ScoredEntry> entries)
    : entries_(std::move(entries)) {
  std::unordered_set<std::string> seen;
  for (const ScoredEntry& e : entries_) {
    if (!seen.insert(e.doc_id).second) {
      throw Error(ErrorCode::kInvalidInput,
                  "duplicate doc_id '" + e.doc_id + "' in ranking");
    }
  }
}

ScoredList ScoredList::FromScores(std::vector<ScoredEntry> entries,
                                  std::size_t k) {
  const std::size_t keep = std::min(k, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    entries.end(), ScoreOrder);
  entries.resize(keep);
  return ScoredList(std::move(entries));
}

std::vector<std::string> ScoredList::DocIds() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const ScoredEntry& e : entries_) out.push_back(e.doc_id);
  return out;
}

void RankConfig::Validate() const {
  if (!(t_fraction > 0.0 && t_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "t_fraction must be in (0, 1]");
  }
  if (rerank_depth < 1) {
    throw Error(ErrorCode::kInvalidInput, "rerank_depth must be positive");
  }
  ot.Validate();
}

std::size_t TopValueCount(std::size_t active_rows, double t_fraction) {
  const auto t = static_cast<std::size_t>(
      std::llround(t_fraction * static_cast<double>(active_rows)));
  return std::clamp<std::size_t>(t, 1, std::max<std::size_t>(1, active_rows));
}

Matrix SelectTopValues(const Matrix& active, const Matrix& sentences,
                       double t_fraction) {
  if (active.rows() < 1 || sentences.rows() < 1) {
    throw Error(ErrorCode::kInvalidInput,
                "select_top_values needs non-empty value and sentence sets");
  }
  if (active.cols() != sentences.cols()) {
    throw Error(ErrorCode::kInvalidInput,
                "value dimension " + std::to_string(active.cols()) +
                    " differs from sentence dimension " +
                    std::to_string(sentences.cols()));
  }
  const std::size_t t = TopValueCount(static_cast<std::size_t>(active.rows()), t_fraction);
  if (t == static_cast<std::size_t>(active.rows())) return active;

  std::vector<double> dist(static_cast<std::size_t>(active.rows()));
  for (Eigen::Index i = 0; i < active.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < sentences.rows(); ++j) {
      best = std::min(best, (active.row(i) - sentences.row(j)).squaredNorm());
    }
    dist[static_cast<std::size_t>(i)] = best;
  }
  std::vector<Eigen::Index> order(dist.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(t),
                    order.end(), [&](Eigen::Index a, Eigen::Index b) {
                      const double da = dist[static_cast<std::size_t>(a)];
                      const double db = dist[static_cast<std::size_t>(b)];
                      return da != db ? da < db : a < b;
                    });
  Matrix out(static_cast<Eigen::Index>(t), active.cols());
  for (std::size_t i = 0; i < t; ++i) {
    out.row(static_cast<Eigen::Index>(i)) = active.row(order[i]);
  }
  return out;
}

double ScoreCandidate(const Matrix& active, const Matrix& sentences,
                      const RankConfig& cfg) {
  return Wasserstein(SelectTopValues(active, sentences, cfg.t_fraction),
                     sentences, cfg.ot);
}

ScoredList RankWithValues(const Matrix& active,
                          std::span<const Document* const> candidates,
                          const RankConfig& cfg, std::size_t k) {
  cfg.Validate();
  if (candidates.empty()) {
    throw Error(ErrorCode::kInvalidInput, "no candidates to rank");
  }
  if (k < 1) throw Error(ErrorCode::kInvalidInput, "k must be positive");
  std::vector<ScoredEntry> scored(candidates.size());
  ParallelFor(candidates.size(), cfg.num_threads, [&](std::size_t i) {
    const Document& d = *candidates[i];
    scored[i] = {d.doc_id, ScoreCandidate(active, d.sentence_embeddings, cfg)};
  });
  return ScoredList::FromScores(std::move(scored), k);
}

ScoredList Rank(const UserProfile& profile,
                std::span<const Document* const> candidates,
                const RankConfig& cfg, std::size_t k) {
  return RankWithValues(ActiveValues(profile), candidates, cfg, k);
}

ScoredList Rerank(const UserProfile& profile, const ScoredList& first_stage,
                  std::span<const Document* const> candidates,
                  const RankConfig& cfg) {
  cfg.Validate();
  std::unordered_map<std::string_view, const Document*> by_id;
  for (const Document* d : candidates) by_id.emplace(d->doc_id, d);
  std::vector<const Document*> head;
  const std::size_t depth = std::min(cfg.rerank_depth, first_stage.size());
  for (std::size_t i = 0; i < first_stage.size(); ++i) {
    auto it = by_id.find(first_stage[i].doc_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kNotFound, "first-stage doc_id '" +
                                            first_stage[i].doc_id +
                                            "' is not a candidate");
    }
    if (i < depth) head.push_back(it->second);
  }
  std::vector<ScoredEntry> out;
  if (!head.empty()) {
    out = Rank(profile, head, cfg, head.size()).entries();
  }
  for (std::size_t i = depth; i < first_stage.size(); ++i) {
    out.push_back(first_stage[i]);
  }
  return ScoredList(std::move(out));
}

double NeuKnnScore(const UserLibrary& library, const Corpus& corpus,
                   const Document& candidate) {
  if (library.doc_ids.empty()) {
    throw Error(ErrorCode::kInvalidInput, "library is empty");
  }
  const Vector target = candidate.DocumentEmbedding();
  double best = std::numeric_limits<double>::infinity();
  for (const std::string& id : library.doc_ids) {
    best = std::min(best, (corpus.Get(id).DocumentEmbedding() - target).norm());
  }
  return best;
}

ScoredList RankNeuKnn(const UserLibrary& library, const Corpus& corpus,
                      std::span<const Document* const> candidates,
                      std::size_t k) {
  std::vector<ScoredEntry> scored;
  scored.reserve(candidates.size());
  for (const Document* d : candidates) {
    scored.push_back({d->doc_id, NeuKnnScore(library, corpus, *d)});
  }
  return ScoredList::FromScores(std::move(scored), k);
}

double TripletMarginLoss(double w_pos, double w_neg, double delta) {
  return std::max(w_pos - w_neg + delta, 0.0);
}

ScoredList ParseFirstStage(std::istream& in) {
  // (relevance, doc_id) pairs; higher relevance first.
  std::vector<std::pair<double, std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      rows.emplace_back(j.at("score").get<double>(),
                        j.at("doc_id").get<std::string>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidInput, "first-stage line " +
                                                std::to_string(line_no) + ": " +
                                                e.what());
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<ScoredEntry> entries;
  entries.reserve(rows.size());
  for (auto& [relevance, id] : rows) {
    entries.push_back({std::move(id), static_cast<double>(entries.size())});
  }
  return ScoredList(std::move(entries));
}

ScoredList ReadFirstStage(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kNotFound, "cannot open first-stage file " + path.string());
  }
  return ParseFirstStage(in);
}

}  // namespace lace
