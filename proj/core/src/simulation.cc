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

#include "lace/simulation.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "lace/error.h"

namespace lace {
namespace {

template <typename Trial>
void SortByUser(std::vector<Trial>& trials) {
  std::stable_sort(trials.begin(), trials.end(), [](const Trial& a, const Trial& b) {
    return a.profile.user_id() < b.profile.user_id();
  });
}

void Summarize(SimulationReport& report, const std::vector<double>& before,
               const std::vector<double>& after) {
  const auto n = static_cast<double>(before.size());
  if (before.empty()) return;
  report.metric_before = std::accumulate(before.begin(), before.end(), 0.0) / n;
  report.metric_after = std::accumulate(after.begin(), after.end(), 0.0) / n;
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    report.deltas.push_back(after[i] - before[i]);
    abs_sum += std::abs(after[i] - before[i]);
  }
  report.mean_abs_delta = abs_sum / n;
  report.p_value = before.size() >= 2 ? PairedTTestPValue(before, after) : 1.0;
}

}  // namespace

nlohmann::json SimulationReport::ToJson() const {
  nlohmann::json failures_json = nlohmann::json::array();
  for (const TrialFailure& f : failures) {
    failures_json.push_back(
        {{"user_id", f.user_id}, {"concept_id", f.concept_id}, {"reason", f.reason}});
  }
  return {{"protocol", protocol},
          {"metric", metric},
          {"metric_before", metric_before},
          {"metric_after", metric_after},
          {"deltas", deltas},
          {"mean_abs_delta", mean_abs_delta},
          {"p_value", p_value},
          {"trials", deltas.size()},
          {"trial_users", trial_users},
          {"failures", std::move(failures_json)}};
}

SimulationReport SimulateSelection(std::vector<SelectionTrial> trials,
                                   std::span<const Document* const> candidates,
                                   Polarity polarity, const RankConfig& cfg,
                                   std::size_t k, ConceptRecallNorm norm) {
  SortByUser(trials);
  SimulationReport report;
  report.protocol = std::string("selection_") + std::string(PolarityName(polarity));
  report.metric = "concept_recall@" + std::to_string(k);
  std::vector<double> before;
  std::vector<double> after;
  for (const SelectionTrial& trial : trials) {
    const std::string& user = trial.profile.user_id();
    try {
      const auto idx = trial.profile.IndexOf(trial.concept_id);
      if (!idx) {
        throw Error(ErrorCode::kNotFound,
                    "concept '" + trial.concept_id + "' not in profile");
      }
      const DocMatcher matcher =
          trial.matcher ? trial.matcher
                        : SubstringMatcher(trial.profile.concepts()[*idx].text);
      const ScoredList initial = Rank(trial.profile, candidates, cfg, k);
      const std::string ids[] = {trial.concept_id};
      const ScoredList tuned =
          Rank(Select(trial.profile, ids, polarity), candidates, cfg, k);
      const auto cr_before = ConceptRecallAtK(initial, matcher, candidates, k, norm);
      const auto cr_after = ConceptRecallAtK(tuned, matcher, candidates, k, norm);
      if (!cr_before || !cr_after) {
        report.failures.push_back(
            {user, trial.concept_id, "no candidate matches the concept"});
        continue;
      }
      before.push_back(*cr_before);
      after.push_back(*cr_after);
      report.trial_users.push_back(user);
    } catch (const Error& e) {
      report.failures.push_back({user, trial.concept_id, e.what()});
    }
  }
  Summarize(report, before, after);
  return report;
}

SimulationReport SimulateSynonymEdit(std::vector<SynonymTrial> trials,
                                     std::span<const Document* const> candidates,
                                     const RankConfig& cfg, std::size_t k) {
  SortByUser(trials);
  SimulationReport report;
  report.protocol = "synonym_edit";
  report.metric = "recall@" + std::to_string(k);
  std::vector<double> before;
  std::vector<double> after;
  for (const SynonymTrial& trial : trials) {
    const std::string& user = trial.profile.user_id();
    try {
      const ScoredList initial = Rank(trial.profile, candidates, cfg, k);
      const UserProfile edited =
          RenameConcept(trial.profile, trial.concept_id, trial.replacement_text,
                        trial.replacement_embedding);
      const ScoredList tuned = Rank(edited, candidates, cfg, k);
      const auto r_before = RecallAtK(initial, trial.judgment, k);
      const auto r_after = RecallAtK(tuned, trial.judgment, k);
      if (!r_before || !r_after) {
        report.failures.push_back({user, trial.concept_id, "no relevant documents"});
        continue;
      }
      before.push_back(*r_before);
      after.push_back(*r_after);
      report.trial_users.push_back(user);
    } catch (const Error& e) {
      report.failures.push_back({user, trial.concept_id, e.what()});
    }
  }
  Summarize(report, before, after);
  return report;
}

}  // namespace lace
