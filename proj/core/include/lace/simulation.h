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

// Simulated interaction studies: the effect of selecting a single profile
// concept on concept recall, and the stability of recall under synonymous
// concept renames.

#ifndef LACE_SIMULATION_H_
#define LACE_SIMULATION_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lace/metrics.h"
#include "lace/profile.h"
#include "lace/ranker.h"

namespace lace {

struct TrialFailure {
  std::string user_id;
  std::string concept_id;
  std::string reason;
};

struct SimulationReport {
  std::string protocol;
  std::string metric;
  double metric_before = 0.0;
  double metric_after = 0.0;
  // after - before, one per successful trial, in user_id order.
  std::vector<double> deltas;
  double mean_abs_delta = 0.0;
  double p_value = 1.0;
  std::vector<std::string> trial_users;
  std::vector<TrialFailure> failures;

  nlohmann::json ToJson() const;
};

struct SelectionTrial {
  UserProfile profile;
  std::string concept_id;
  // Defaults to SubstringMatcher(concept text) when empty.
  DocMatcher matcher;
};

SimulationReport SimulateSelection(std::vector<SelectionTrial> trials,
                                   std::span<const Document* const> candidates,
                                   Polarity polarity, const RankConfig& cfg,
                                   std::size_t k = 20,
                                   ConceptRecallNorm norm = ConceptRecallNorm::kCapped);

struct SynonymTrial {
  UserProfile profile;
  std::string concept_id;
  std::string replacement_text;
  Vector replacement_embedding;
  Judgment judgment;
};

SimulationReport SimulateSynonymEdit(std::vector<SynonymTrial> trials,
                                     std::span<const Document* const> candidates,
                                     const RankConfig& cfg, std::size_t k = 20);

}  // namespace lace

#endif  // LACE_SIMULATION_H_
