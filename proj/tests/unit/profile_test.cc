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

#include <map>
#include <random>
#include <set>

#include <Eigen/QR>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "lace/error.h"
#include "lace/synthetic.h"
#include "test_util.h"

namespace lace {
namespace {

using testing::CodeOf;
using testing::RandomMatrix;
using testing::Rows;

std::shared_ptr<const LibrarySentences> Sentences(const Matrix& rows) {
  auto s = std::make_shared<LibrarySentences>();
  s->embeddings = rows;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    s->index.push_back({"lib", static_cast<std::size_t>(i)});
  }
  return s;
}

ConceptInventory Inventory(const Matrix& rows) {
  std::vector<Concept> out;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    char id[8];
    std::snprintf(id, sizeof(id), "c%02d", static_cast<int>(i));
    out.push_back({id, std::string("concept ") + id, rows.row(i).transpose()});
  }
  return ConceptInventory(std::move(out));
}

UserProfile ProfileFrom(const Matrix& concepts, const Matrix& sentences,
                        const OtConfig& cfg = {}) {
  std::vector<ProfileConcept> pc;
  for (Eigen::Index i = 0; i < concepts.rows(); ++i) {
    pc.push_back({"k" + std::to_string(i), "text " + std::to_string(i),
                  concepts.row(i).transpose(), ConceptState::kNeutral,
                  ConceptSource::kRetrieved, 0.0});
  }
  return UserProfile("u", std::move(pc), Sentences(sentences), cfg);
}

// Checks every non-fallback row against the plan-weighted combination.
void ExpectConvex(const UserProfile& p) {
  const Matrix& q = p.plan().entries();
  const Matrix& s = p.sentences().embeddings;
  for (Eigen::Index i = 0; i < p.values().rows(); ++i) {
    if (p.fallback_rows()[static_cast<std::size_t>(i)]) continue;
    const Vector alpha = q.col(i) / q.col(i).sum();
    EXPECT_GE(alpha.minCoeff(), -1e-9);
    EXPECT_NEAR(alpha.sum(), 1.0, 1e-6);
    const Vector recon = s.transpose() * alpha;
    EXPECT_LE((p.values().row(i).transpose() - recon).norm(), 1e-6);
  }
}

TEST(Prefetch, ExactMatchHasZeroDistance) {
  const Matrix k = Rows({{0, 0}, {5, 5}, {-5, 2}});
  const auto out = PrefetchConcepts(*Sentences(Rows({{5, 5}})), Inventory(k));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].entry.concept_id, "c01");
  EXPECT_EQ(out[0].distance, 0.0);
}

TEST(Prefetch, DedupesSharedNearest) {
  const Matrix k = Rows({{0, 0}, {5, 5}});
  const auto out = PrefetchConcepts(*Sentences(Rows({{4, 5}, {5, 4.5}})), Inventory(k));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].entry.concept_id, "c01");
  EXPECT_NEAR(out[0].distance, 0.5, 1e-12);
}

TEST(Prefetch, MatchesBruteForceNearest) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix s = RandomMatrix(rng, 5, 3);
    const Matrix k = RandomMatrix(rng, 10, 3);
    std::map<std::string, double> oracle;
    for (int i = 0; i < 5; ++i) {
      int best = 0;
      for (int c = 1; c < 10; ++c) {
        if (testing::Distance(s, i, k, c) < testing::Distance(s, i, k, best)) best = c;
      }
      char id[8];
      std::snprintf(id, sizeof(id), "c%02d", best);
      const double d = testing::Distance(s, i, k, best);
      auto [it, fresh] = oracle.emplace(id, d);
      if (!fresh) it->second = std::min(it->second, d);
    }
    const auto got = PrefetchConcepts(*Sentences(s), Inventory(k));
    ASSERT_EQ(got.size(), oracle.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got[i].distance, oracle.at(got[i].entry.concept_id), 1e-12);
      if (i > 0) EXPECT_LE(got[i - 1].distance, got[i].distance);
    }
  }
}

TEST(Prefetch, EmptyLibraryFails) {
  LibrarySentences empty;
  empty.embeddings.resize(0, 2);
  EXPECT_EQ(CodeOf([&] { PrefetchConcepts(empty, Inventory(Rows({{0, 0}}))); }),
            ErrorCode::kInvalidInput);
}

TEST(BuildProfile, SinglePrefetchedGivesSizeOne) {
  const auto s = Sentences(Rows({{1, 0}, {0, 1}}));
  const std::vector<PrefetchedConcept> pre = {{{"a", "alpha", Vector::Zero(2)}, 1.0}};
  EXPECT_EQ(BuildProfile("u", s, pre, 0.5, {}).size(), 1u);
}

TEST(BuildProfile, RetainsHalfBySmallestMinDistance) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix s = RandomMatrix(rng, 4, 3);
    const Matrix k = RandomMatrix(rng, 6, 3, 2.0);
    std::vector<PrefetchedConcept> pre;
    std::vector<std::pair<double, std::string>> oracle;
    for (int c = 0; c < 6; ++c) {
      const std::string id = "c" + std::to_string(c);
      pre.push_back({{id, "t" + id, k.row(c).transpose()}, 0.0});
      double d = 1e300;
      for (int j = 0; j < 4; ++j) d = std::min(d, testing::Distance(k, c, s, j));
      oracle.push_back({d, id});
    }
    std::sort(oracle.begin(), oracle.end());
    const UserProfile p = BuildProfile("u", Sentences(s), pre, kDefaultRetainFraction, {});
    ASSERT_EQ(p.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(p.concepts()[i].concept_id, oracle[i].second);
      EXPECT_NEAR(*p.concepts()[i].retrieval_distance, oracle[i].first, 1e-12);
    }
  }
}

TEST(BuildProfile, RetainAllKeepsPrefetchedOrder) {
  const Matrix k = Rows({{0, 0}, {10, 0}, {0, 10}, {10, 10}});
  const Matrix s = Rows({{0.3, 0}, {10, 0.1}, {0, 9.0}, {10.5, 10}});
  const auto lib = Sentences(s);
  const auto pre = PrefetchConcepts(*lib, Inventory(k));
  ASSERT_EQ(pre.size(), 4u);
  const UserProfile p = BuildProfile("u", lib, pre, 1.0, {});
  ASSERT_EQ(p.size(), pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) {
    EXPECT_EQ(p.concepts()[i].concept_id, pre[i].entry.concept_id);
  }
}

TEST(BuildProfile, RejectsBadRetainFraction) {
  const std::vector<PrefetchedConcept> pre = {{{"a", "alpha", Vector::Zero(2)}, 1.0}};
  EXPECT_EQ(CodeOf([&] { BuildProfile("u", Sentences(Rows({{1, 0}})), pre, 0.0, {}); }),
            ErrorCode::kInvalidInput);
}

TEST(ComputeValues, SingleConceptTakesMean) {
  std::mt19937_64 rng(2);
  const Matrix s = RandomMatrix(rng, 7, 4);
  const ConceptValues v = ComputeValues(RandomMatrix(rng, 1, 4), s, {});
  EXPECT_LE((v.values.row(0) - s.colwise().mean()).norm(), 1e-12);
}

TEST(ComputeValues, IdenticalSentences) {
  std::mt19937_64 rng(3);
  const Vector x = RandomMatrix(rng, 1, 5).row(0).transpose();
  const Matrix s = x.transpose().replicate(6, 1);
  const ConceptValues v = ComputeValues(RandomMatrix(rng, 3, 5), s, {});
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_LE((v.values.row(i).transpose() - x).norm(), 1e-9);
  }
}

TEST(ComputeValues, MatchedPairsRecoverTheirSentence) {
  const Matrix k = Rows({{10, 0, 0}, {0, 10, 0}, {0, 0, 10}});
  const Matrix s = Rows({{0.1, 10.2, 0}, {0, 0.2, 9.9}, {9.8, 0, 0.1}});
  OtConfig cfg;
  cfg.epsilon = 1e-3;
  const ConceptValues v = ComputeValues(k, s, cfg);
  EXPECT_LE((v.values.row(0) - s.row(2)).norm(), 1e-3);
  EXPECT_LE((v.values.row(1) - s.row(0)).norm(), 1e-3);
  EXPECT_LE((v.values.row(2) - s.row(1)).norm(), 1e-3);
}

TEST(ComputeValues, ColumnMassIsUniform) {
  std::mt19937_64 rng(4);
  for (int p = 1; p <= 6; ++p) {
    const ConceptValues v = ComputeValues(RandomMatrix(rng, p, 3), RandomMatrix(rng, 9, 3), {});
    for (Eigen::Index i = 0; i < p; ++i) {
      EXPECT_NEAR(v.plan.entries().col(i).sum(), 1.0 / p, 1e-6);
    }
  }
}

TEST(Profile, RandomInstancesAreConvex) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    ExpectConvex(ProfileFrom(RandomMatrix(rng, 1 + trial % 8, 4, 2.0),
                             RandomMatrix(rng, 1 + (trial * 13) % 40, 4)));
  }
}

class EditTest : public ::testing::Test {
 protected:
  EditTest()
      : base_(ProfileFrom(Rows({{1, 0}, {0, 1}}),
                          Rows({{1, 0.1}, {0.9, 0}, {0, 1.1}, {0.1, 0.8}}))) {}
  UserProfile base_;
};

TEST_F(EditTest, AddGrowsProfileAndPlan) {
  const UserProfile p = AddConcept(base_, "Third Topic", Vector::Constant(2, 0.5));
  EXPECT_EQ(p.size(), 3u);
  EXPECT_EQ(p.plan().cols(), 3);
  EXPECT_EQ(p.values().rows(), 3);
  const ProfileConcept& added = p.concepts().back();
  EXPECT_EQ(added.source, ConceptSource::kUserAdded);
  EXPECT_FALSE(added.retrieval_distance.has_value());
  EXPECT_EQ(added.concept_id, "user:third topic");
  EXPECT_EQ(added.text, "Third Topic");
}

TEST_F(EditTest, AddDuplicateTextFails) {
  const auto add = [&] { AddConcept(base_, "  TEXT 1 ", Vector::Zero(2)); };
  EXPECT_EQ(CodeOf(add), ErrorCode::kDuplicate);
}

TEST_F(EditTest, AddBlankOrWrongDimFails) {
  EXPECT_EQ(CodeOf([&] { AddConcept(base_, "  ", Vector::Zero(2)); }),
            ErrorCode::kInvalidInput);
  EXPECT_EQ(CodeOf([&] { AddConcept(base_, "x", Vector::Zero(3)); }),
            ErrorCode::kValidation);
}

TEST_F(EditTest, FarConceptStaysConvex) {
  const UserProfile p = AddConcept(base_, "far away", Vector::Constant(2, 500.0));
  ExpectConvex(p);
  const auto row = p.values().row(2);
  const Matrix& s = p.sentences().embeddings;
  if (!p.fallback_rows()[2]) {
    // Least-squares coefficients over the sentence rows reproduce the value.
    const Vector alpha = s.transpose().colPivHouseholderQr().solve(row.transpose());
    EXPECT_LE((s.transpose() * alpha - row.transpose()).norm(), 1e-6);
    for (Eigen::Index e = 0; e < 2; ++e) {
      EXPECT_GE(row(e), s.col(e).minCoeff() - 1e-9);
      EXPECT_LE(row(e), s.col(e).maxCoeff() + 1e-9);
    }
  }
}

TEST_F(EditTest, RemoveShrinks) {
  const UserProfile p3 = AddConcept(base_, "third", Vector::Constant(2, 0.5));
  const UserProfile p2 = RemoveConcept(p3, "k0");
  EXPECT_EQ(p2.size(), 2u);
  EXPECT_EQ(p2.concepts()[0].concept_id, "k1");
}

TEST_F(EditTest, RemoveUnknownAndLast) {
  EXPECT_EQ(CodeOf([&] { RemoveConcept(base_, "nope"); }), ErrorCode::kNotFound);
  const UserProfile one = RemoveConcept(base_, "k0");
  EXPECT_EQ(CodeOf([&] { RemoveConcept(one, "k1"); }), ErrorCode::kInvalidState);
}

TEST_F(EditTest, RemoveEqualsRebuild) {
  const UserProfile p3 = AddConcept(base_, "third", Vector::Constant(2, 0.5));
  const UserProfile removed = RemoveConcept(p3, "k1");
  std::vector<ProfileConcept> rest = {p3.concepts()[0], p3.concepts()[2]};
  const UserProfile rebuilt("u", rest, p3.shared_sentences(), p3.ot_config());
  EXPECT_EQ(removed.values(), rebuilt.values());
  EXPECT_EQ(removed.plan().entries(), rebuilt.plan().entries());
}

TEST_F(EditTest, RenameEqualsRemoveThenAdd) {
  const Vector e = Vector::Constant(2, 0.7);
  const UserProfile renamed = RenameConcept(base_, "k0", "new name", e);
  const UserProfile composed = AddConcept(RemoveConcept(base_, "k0"), "new name", e);
  EXPECT_EQ(ProfileToJson(renamed, true).dump(), ProfileToJson(composed, true).dump());
  EXPECT_EQ(renamed.concepts().back().concept_id, "user:new name");
}

TEST_F(EditTest, RenameSoleConceptIsAllowed) {
  const UserProfile one = RemoveConcept(base_, "k0");
  const UserProfile renamed = RenameConcept(one, "k1", "only", Vector::Ones(2));
  EXPECT_EQ(renamed.size(), 1u);
}

TEST_F(EditTest, RenameToOtherConceptTextFails) {
  EXPECT_EQ(CodeOf([&] { RenameConcept(base_, "k0", "Text 1", Vector::Zero(2)); }),
            ErrorCode::kDuplicate);
  EXPECT_EQ(CodeOf([&] { RenameConcept(base_, "zz", "fresh", Vector::Zero(2)); }),
            ErrorCode::kNotFound);
}

TEST(Rename, SynonymPerturbsValuesSlightly) {
  SyntheticSpec spec;
  spec.users = 6;
  spec.candidates = 200;
  const SyntheticWorld world = GenerateSyntheticWorld(spec);
  const auto profiles = BuildUserProfiles(world, kDefaultRetainFraction, {});
  for (std::size_t u = 0; u < profiles.size(); ++u) {
    const UserProfile& p = profiles[u];
    const std::string target = EditTarget(p, world.users[u].primary_concept_id);
    const auto [text, vec] = world.Synonym(target);
    const UserProfile renamed = RenameConcept(p, target, text, vec);
    const std::size_t old_idx = *p.IndexOf(target);
    std::size_t j = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i == old_idx) continue;
      EXPECT_LE((p.values().row(static_cast<Eigen::Index>(i)) -
                 renamed.values().row(static_cast<Eigen::Index>(j)))
                    .norm(),
                0.05);
      ++j;
    }
    EXPECT_LE((p.values().row(static_cast<Eigen::Index>(old_idx)) -
               renamed.values().row(static_cast<Eigen::Index>(p.size() - 1)))
                  .norm(),
              0.05);
  }
}

class SelectTest : public ::testing::Test {
 protected:
  SelectTest()
      : p_(ProfileFrom(Rows({{1, 0}, {0, 1}, {1, 1}}),
                       Rows({{1, 0}, {0, 1}, {1, 1}, {0.5, 0.5}}))) {}
  std::vector<Eigen::Index> Active(const UserProfile& p) { return ActiveRows(p); }
  UserProfile p_;
};

TEST_F(SelectTest, PositiveKeepsOnlySelected) {
  const std::vector<std::string> a = {"k0"};
  const UserProfile s = Select(p_, a, Polarity::kPositive);
  EXPECT_EQ(Active(s), (std::vector<Eigen::Index>{0}));
  EXPECT_EQ(ActiveValues(s), p_.values().topRows(1));
}

TEST_F(SelectTest, NegativeKeepsComplement) {
  const std::vector<std::string> b = {"k1"};
  EXPECT_EQ(Active(Select(p_, b, Polarity::kNegative)), (std::vector<Eigen::Index>{0, 2}));
}

TEST_F(SelectTest, NoSelectionKeepsAll) {
  EXPECT_EQ(Active(p_), (std::vector<Eigen::Index>{0, 1, 2}));
}

TEST_F(SelectTest, PositiveDominatesNegative) {
  const std::vector<std::string> a = {"k0"}, b = {"k1"};
  const UserProfile s = Select(Select(p_, a, Polarity::kPositive), b, Polarity::kNegative);
  EXPECT_EQ(Active(s), (std::vector<Eigen::Index>{0}));
}

TEST_F(SelectTest, AllNegativeIsEmptyActiveSet) {
  const std::vector<std::string> all = {"k0", "k1", "k2"};
  EXPECT_EQ(CodeOf([&] { ActiveValues(Select(p_, all, Polarity::kNegative)); }),
            ErrorCode::kEmptyActiveSet);
}

TEST_F(SelectTest, UnknownIdFails) {
  const std::vector<std::string> bad = {"k9"};
  EXPECT_EQ(CodeOf([&] { Select(p_, bad, Polarity::kPositive); }), ErrorCode::kNotFound);
}

TEST_F(SelectTest, SelectThenClearRestores) {
  const std::vector<std::string> ids = {"k0", "k2"};
  const UserProfile back = ClearSelection(Select(p_, ids, Polarity::kPositive));
  EXPECT_EQ(ProfileToJson(back, true).dump(), ProfileToJson(p_, true).dump());
}

TEST_F(SelectTest, SelectionDoesNotRecomputeValues) {
  const std::vector<std::string> ids = {"k1"};
  const UserProfile s = Select(p_, ids, Polarity::kNegative);
  EXPECT_EQ(&s.values(), &p_.values());
}

TEST(Selection, RandomStatesMatchSetAlgebra) {
  std::mt19937_64 rng(6);
  const UserProfile p = ProfileFrom(RandomMatrix(rng, 6, 3), RandomMatrix(rng, 10, 3));
  std::uniform_int_distribution<int> pick(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ConceptState> states;
    std::set<Eigen::Index> pos, neg;
    for (Eigen::Index i = 0; i < 6; ++i) {
      const auto st = static_cast<ConceptState>(pick(rng));
      states.push_back(st);
      if (st == ConceptState::kPositive) pos.insert(i);
      if (st == ConceptState::kNegative) neg.insert(i);
    }
    std::set<Eigen::Index> expect = pos;
    if (pos.empty()) {
      for (Eigen::Index i = 0; i < 6; ++i) {
        if (!neg.contains(i)) expect.insert(i);
      }
    }
    const UserProfile s = p.WithStates(states);
    if (expect.empty()) {
      EXPECT_EQ(CodeOf([&] { ActiveRows(s); }), ErrorCode::kEmptyActiveSet);
      continue;
    }
    const auto rows = ActiveRows(s);
    EXPECT_EQ(std::set<Eigen::Index>(rows.begin(), rows.end()), expect);
  }
}

TEST(Profile, BuildIsByteDeterministic) {
  SyntheticSpec spec;
  spec.users = 3;
  spec.candidates = 100;
  const SyntheticWorld world = GenerateSyntheticWorld(spec);
  for (const SyntheticUser& u : world.users) {
    const std::string a =
        ProfileToJson(BuildProfile(u.library, world.corpus, world.inventory, 0.5, {}), true).dump();
    const std::string b =
        ProfileToJson(BuildProfile(u.library, world.corpus, world.inventory, 0.5, {}), true).dump();
    EXPECT_EQ(a, b);
  }
}

TEST(Profile, JsonRoundTrip) {
  std::mt19937_64 rng(7);
  const UserProfile p = AddConcept(
      ProfileFrom(RandomMatrix(rng, 3, 3), RandomMatrix(rng, 5, 3)), "extra",
      Vector::Ones(3));
  const std::vector<std::string> ids = {"k1"};
  const UserProfile s = Select(p, ids, Polarity::kNegative);
  const nlohmann::json j = ProfileToJson(s, true);
  const UserProfile back = ProfileFromJson(j, s.shared_sentences(), s.ot_config());
  EXPECT_EQ(ProfileToJson(back, true).dump(), j.dump());
  EXPECT_FALSE(ProfileToJson(s, false).contains("values"));
}

TEST(GatherSentences, ConcatenatesInLibraryOrder) {
  const Corpus c({testing::MakeDoc("a", Rows({{1, 1}})),
                  testing::MakeDoc("b", Rows({{2, 2}, {3, 3}}))});
  const LibrarySentences s = GatherSentences({"u", {"b", "a"}}, c);
  ASSERT_EQ(s.embeddings.rows(), 3);
  EXPECT_EQ(s.embeddings(0, 0), 2.0);
  EXPECT_EQ(s.index[2], (SentenceRef{"a", 0}));
  EXPECT_EQ(CodeOf([&] { GatherSentences({"u", {"zz"}}, c); }), ErrorCode::kNotFound);
}

}  // namespace
}  // namespace lace
