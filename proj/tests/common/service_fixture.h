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

// Small synthetic index plus a random edit driver for service-level tests.
#ifndef LACE_TESTS_SERVICE_FIXTURE_H_
#define LACE_TESTS_SERVICE_FIXTURE_H_

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "lace/error.h"
#include "lace/service.h"
#include "lace/synthetic.h"

namespace lace::testing {

struct ServiceWorld {
  std::shared_ptr<const Index> index;
  std::shared_ptr<EmbeddingProvider> embedder;
  std::vector<UserLibrary> libraries;
  // Texts with cached concept embeddings, usable in add/rename edits.
  std::vector<std::string> extra_texts;
};

inline ServiceWorld MakeServiceWorld(int users = 6, int candidates = 300,
                                     std::uint64_t seed = 7) {
  SyntheticSpec spec;
  spec.users = users;
  spec.candidates = candidates;
  spec.seed = seed;
  SyntheticWorld world = GenerateSyntheticWorld(spec);
  ServiceWorld out;
  for (const SyntheticUser& u : world.users) out.libraries.push_back(u.library);
  out.index = std::make_shared<const Index>(std::move(world.corpus), std::move(world.inventory),
                                            world.candidate_ids);
  out.embedder = std::make_shared<EmbeddingProvider>(out.index->corpus().dim());
  out.embedder->SeedFromInventory(out.index->inventory());
  std::mt19937_64 rng(seed + 1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 12; ++i) {
    Vector v(out.index->corpus().dim());
    for (Eigen::Index e = 0; e < v.size(); ++e) v(e) = n(rng);
    out.extra_texts.push_back("extra interest " + std::to_string(i));
    out.embedder->AddToCache(TextKind::kConcept, out.extra_texts.back(), v);
  }
  return out;
}

// Issues random mutations; rejected ones (duplicate text, last concept,
// empty lists) are counted but leave no event.
class EditDriver {
 public:
  EditDriver(const ServiceWorld& world, std::uint64_t seed) : world_(world), rng_(seed) {}

  void Step(Service& service, const std::vector<std::string>& users) {
    const std::string& user = users[Pick(users.size())];
    const UserRecord rec = service.GetUser(user);
    const auto concepts = rec.profile.concepts();
    const std::string& some_concept = concepts[Pick(concepts.size())].concept_id;
    const std::string& text = world_.extra_texts[Pick(world_.extra_texts.size())];
    Edit e;
    try {
      switch (Pick(8)) {
        case 0:
          e.kind = Edit::Kind::kAdd;
          e.text = text;
          service.ApplyEdit(user, e);
          break;
        case 1:
          e.kind = Edit::Kind::kRemove;
          e.concept_id = some_concept;
          service.ApplyEdit(user, e);
          break;
        case 2:
          e.kind = Edit::Kind::kRename;
          e.concept_id = some_concept;
          e.text = text;
          service.ApplyEdit(user, e);
          break;
        case 3:
          e.kind = Edit::Kind::kSelect;
          e.concept_ids = {some_concept};
          e.polarity = Pick(2) ? Polarity::kPositive : Polarity::kNegative;
          service.ApplyEdit(user, e);
          break;
        case 4:
          e.kind = Edit::Kind::kSetSelection;
          for (const ProfileConcept& c : concepts) {
            const auto r = Pick(3);
            if (r == 1) e.positive.push_back(c.concept_id);
            if (r == 2) e.negative.push_back(c.concept_id);
          }
          service.ApplyEdit(user, e);
          break;
        case 5:
          e.kind = Edit::Kind::kClear;
          service.ApplyEdit(user, e);
          break;
        default: {
          const auto& ids = world_.index->candidate_ids();
          service.SetSaved(user, ids[Pick(std::min<std::size_t>(ids.size(), 20))], Pick(3) != 0,
                           Pick(4) == 0 ? std::optional<std::uint64_t>(rec.revision)
                                        : std::nullopt);
          break;
        }
      }
      ++accepted;
    } catch (const Error&) {
      ++rejected;
    }
  }

  std::size_t accepted = 0;
  std::size_t rejected = 0;

 private:
  std::size_t Pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  const ServiceWorld& world_;
  std::mt19937_64 rng_;
};

}  // namespace lace::testing

#endif  // LACE_TESTS_SERVICE_FIXTURE_H_
