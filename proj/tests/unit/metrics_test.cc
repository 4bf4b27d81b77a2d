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

#include <cmath>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "lace/error.h"
#include "metric_oracles.h"
#include "test_util.h"

namespace lace {
namespace {

using testing::CodeOf;

ScoredList List(std::initializer_list<const char*> ids) {
  std::vector<ScoredEntry> e;
  for (const char* id : ids) e.push_back({id, static_cast<double>(e.size())});
  return ScoredList(std::move(e));
}

Judgment Rel(std::initializer_list<const char*> ids) {
  Judgment j{"u", {}};
  for (const char* id : ids) j.relevant_doc_ids.insert(id);
  return j;
}

TEST(Ndcg, Cases) {
  EXPECT_DOUBLE_EQ(NdcgAtK(List({"a", "b", "c"}), Rel({"a", "b"}), 2), 1.0);
  EXPECT_EQ(NdcgAtK(List({"a", "b", "c"}), Rel({"c"}), 2), 0.0);
  EXPECT_DOUBLE_EQ(NdcgAtK(List({"x", "r"}), Rel({"r"}), 2), 1.0 / std::log2(3.0));
}

TEST(Ndcg, AtOneIsTopRelevance) {
  EXPECT_EQ(NdcgAtK(List({"a", "b"}), Rel({"a"}), 1), 1.0);
  EXPECT_EQ(NdcgAtK(List({"a", "b"}), Rel({"b"}), 1), 0.0);
}

TEST(Recall, Cases) {
  EXPECT_EQ(RecallAtK(List({"a", "b", "c"}), Rel({"a", "b"}), 2), 1.0);
  EXPECT_EQ(RecallAtK(List({"a", "b", "c", "d"}), Rel({"d", "b"}), 4), 1.0);
  std::vector<ScoredEntry> e;
  for (int i = 0; i < 30; ++i) e.push_back({"d" + std::to_string(i), static_cast<double>(i)});
  Judgment j{"u", {"d3", "d17", "d25", "d29"}};
  EXPECT_EQ(RecallAtK(ScoredList(e), j, 20), 0.5);
  EXPECT_FALSE(RecallAtK(List({"a"}), Rel({}), 5).has_value());
}

TEST(Recall, NondecreasingInK) {
  const ScoredList l = List({"a", "b", "c", "d", "e"});
  const Judgment j = Rel({"b", "e", "z"});
  double prev = 0.0;
  for (std::size_t k = 1; k <= 6; ++k) {
    const double r = *RecallAtK(l, j, k);
    EXPECT_GE(r, prev);
    prev = r;
  }
}

TEST(Mrr, Cases) {
  EXPECT_EQ(Mrr(List({"a", "b"}), Rel({"a"})), 1.0);
  EXPECT_EQ(Mrr(List({"a", "b"}), Rel({"z"})), 0.0);
  EXPECT_EQ(Mrr(List({"a", "b", "c", "d"}), Rel({"d"})), 0.25);
}

class ConceptRecallTest : public ::testing::Test {
 protected:
  ConceptRecallTest() {
    for (int i = 0; i < 40; ++i) {
      Document d = testing::MakeDoc("d" + std::to_string(100 + i), Matrix::Zero(1, 2));
      if (i % 2 == 0) d.sentences[0] = "About Graph Kernels here";
      docs_.push_back(std::move(d));
    }
    for (const Document& d : docs_) ptrs_.push_back(&d);
    matcher_ = SubstringMatcher("graph kernels");
  }
  ScoredList Ranking(const std::vector<int>& order) {
    std::vector<ScoredEntry> e;
    for (int i : order) e.push_back({docs_[static_cast<std::size_t>(i)].doc_id, static_cast<double>(e.size())});
    return ScoredList(std::move(e));
  }
  std::vector<Document> docs_;
  std::vector<const Document*> ptrs_;
  DocMatcher matcher_;
};

TEST_F(ConceptRecallTest, AllMatchingTopIsOne) {
  std::vector<int> order;
  for (int i = 0; i < 40; i += 2) order.push_back(i);
  EXPECT_EQ(ConceptRecallAtK(Ranking(order), matcher_, ptrs_, 20), 1.0);
  EXPECT_EQ(ConceptRecallAtK(Ranking(order), matcher_, ptrs_, 10), 1.0);
}

TEST_F(ConceptRecallTest, NoMatchingTopIsZero) {
  std::vector<int> order;
  for (int i = 1; i < 40; i += 2) order.push_back(i);
  EXPECT_EQ(ConceptRecallAtK(Ranking(order), matcher_, ptrs_, 20), 0.0);
}

TEST_F(ConceptRecallTest, HalfOfSixMatching) {
  // Only six documents match in this candidate pool.
  std::vector<const Document*> pool;
  for (int i = 0; i < 12; ++i) pool.push_back(ptrs_[static_cast<std::size_t>(i)]);
  for (int i = 13; i < 40; i += 2) pool.push_back(ptrs_[static_cast<std::size_t>(i)]);
  const ScoredList r = Ranking({0, 1, 2, 3, 4, 5, 13, 15});
  EXPECT_EQ(ConceptRecallAtK(r, matcher_, pool, 20), 0.5);
  EXPECT_EQ(ConceptRecallAtK(r, matcher_, pool, 20, ConceptRecallNorm::kUncapped), 0.5);
}

TEST_F(ConceptRecallTest, CappedVersusUncapped) {
  std::vector<int> order;
  for (int i = 0; i < 20; i += 2) order.push_back(i);
  // 10 hits, 20 total matches, k = 10.
  EXPECT_EQ(ConceptRecallAtK(Ranking(order), matcher_, ptrs_, 10), 1.0);
  EXPECT_EQ(ConceptRecallAtK(Ranking(order), matcher_, ptrs_, 10, ConceptRecallNorm::kUncapped),
            0.5);
  const DocMatcher none = [](const Document&) { return false; };
  EXPECT_FALSE(ConceptRecallAtK(Ranking(order), none, ptrs_, 10).has_value());
}

TEST(SubstringMatcher, CaseInsensitiveTitleOrSentence) {
  Document d = testing::MakeDoc("x", Matrix::Zero(1, 2));
  d.title = "Optimal TRANSPORT";
  EXPECT_TRUE(SubstringMatcher("transport")(d));
  EXPECT_FALSE(SubstringMatcher("kernels")(d));
  EXPECT_FALSE(SubstringMatcher("")(d));
}

TEST(PairwiseAccuracy, Cases) {
  const std::unordered_map<std::string, double> s = {{"a", 0.1}, {"b", 0.5}, {"c", 0.5}, {"d", 0.9}};
  const std::vector<RatedPair> right = {{"u", "a", "b"}, {"u", "b", "d"}};
  EXPECT_EQ(PairwiseAccuracy(s, right), 1.0);
  const std::vector<RatedPair> tied = {{"u", "b", "c"}, {"u", "c", "b"}};
  EXPECT_EQ(PairwiseAccuracy(s, tied), 0.5);
  const std::vector<RatedPair> mixed = {
      {"u", "a", "d"}, {"u", "d", "a"}, {"u", "b", "c"}, {"u", "c", "a"}};
  const std::map<std::string, double> ms(s.begin(), s.end());
  EXPECT_EQ(PairwiseAccuracy(s, mixed),
            oracle::Pairwise(ms, {{"a", "d"}, {"d", "a"}, {"b", "c"}, {"c", "a"}}));
  EXPECT_EQ(PairwiseAccuracy(s, mixed), 1.5 / 4.0);
  EXPECT_EQ(CodeOf([&] { PairwiseAccuracy(s, std::vector<RatedPair>{}); }),
            ErrorCode::kInvalidInput);
  const std::vector<RatedPair> ghost = {{"u", "a", "zz"}};
  EXPECT_EQ(CodeOf([&] { PairwiseAccuracy(s, ghost); }), ErrorCode::kNotFound);
}

TEST(PairwiseAccuracy, SelfAndNegation) {
  std::unordered_map<std::string, double> s, neg;
  std::vector<RatedPair> pairs;
  for (int i = 0; i < 10; ++i) {
    s["d" + std::to_string(i)] = i;
    neg["d" + std::to_string(i)] = -i;
  }
  for (int i = 0; i < 10; ++i) {
    for (int j = i + 1; j < 10; ++j) pairs.push_back({"u", "d" + std::to_string(i), "d" + std::to_string(j)});
  }
  EXPECT_EQ(PairwiseAccuracy(s, pairs), 1.0);
  EXPECT_EQ(PairwiseAccuracy(neg, pairs), 0.0);
}

TEST(KendallRankLoss, Cases) {
  const ScoredList sys = List({"a", "b", "c", "d"});
  const std::vector<std::string> same = {"a", "b", "c", "d"};
  const std::vector<std::string> rev = {"d", "c", "b", "a"};
  const std::vector<std::string> two = {"b", "a", "d", "c"};
  EXPECT_EQ(KendallRankLoss(sys, same), 0.0);
  EXPECT_EQ(KendallRankLoss(sys, rev), 1.0);
  EXPECT_DOUBLE_EQ(KendallRankLoss(sys, two), 1.0 / 3.0);
  const std::vector<std::string> one = {"a", "zz"};
  EXPECT_EQ(CodeOf([&] { KendallRankLoss(sys, one); }), ErrorCode::kInvalidInput);
}

TEST(Metrics, RandomizedAgainstOracles) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 20;
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("d" + std::to_string(i));
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<ScoredEntry> e;
    for (const auto& id : ids) e.push_back({id, static_cast<double>(e.size())});
    const ScoredList ranking(e);
    std::set<std::string> rel;
    std::bernoulli_distribution coin(0.3);
    for (int i = 0; i < n; ++i) {
      if (coin(rng)) rel.insert("d" + std::to_string(i));
    }
    if (rel.empty()) rel.insert("d0");
    const Judgment j{"u", {rel.begin(), rel.end()}};
    const std::size_t k = 1 + static_cast<std::size_t>(trial % 7);
    EXPECT_NEAR(NdcgAtK(ranking, j, k), oracle::Ndcg(ids, rel, k), 1e-9);
    EXPECT_NEAR(*RecallAtK(ranking, j, k), oracle::Recall(ids, rel, k), 1e-9);
    EXPECT_NEAR(Mrr(ranking, j), oracle::Mrr(ids, rel), 1e-9);
    for (double v : {NdcgAtK(ranking, j, k), *RecallAtK(ranking, j, k), Mrr(ranking, j)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    std::vector<std::string> ref = ids;
    std::shuffle(ref.begin(), ref.end(), rng);
    EXPECT_NEAR(KendallRankLoss(ranking, ref), oracle::Kendall(ids, ref), 1e-9);
  }
}

TEST(PairedTTest, MatchesReferenceValues) {
  const std::vector<double> b1 = {1, 2, 3, 4, 5}, a1 = {2, 2, 4, 5, 7};
  EXPECT_NEAR(PairedTTestPValue(b1, a1), 0.034109423167409635, 1e-9);
  const std::vector<double> b2 = {0.2, 0.2, 0.1, 0.3, 0.4, 0.6};
  const std::vector<double> a2 = {0.3, 0.1, 0.4, 0.2, 0.9, 0.5};
  EXPECT_NEAR(PairedTTestPValue(b2, a2), 0.37739122094954614, 1e-9);
  EXPECT_EQ(PairedTTestPValue(b1, b1), 1.0);
  const std::vector<double> one = {1};
  EXPECT_EQ(CodeOf([&] { PairedTTestPValue(one, one); }), ErrorCode::kInvalidInput);
}

TEST(JudgmentFiles, Parse) {
  testing::TempDir dir;
  std::ofstream(dir.path() / "j.jsonl") << R"({"user_id":"u1","relevant_doc_ids":["a","b"]})" "\n";
  std::ofstream(dir.path() / "p.jsonl")
      << R"({"user_id":"u1","hi":"a","lo":"b","gap":"hard"})" "\n"
      << R"({"user_id":"u1","hi":"a","lo":"a","gap":"easy"})" "\n";
  const auto j = ReadJudgmentsJsonl(dir.path() / "j.jsonl");
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0].relevant_doc_ids.size(), 2u);
  EXPECT_EQ(CodeOf([&] { ReadRatedPairsJsonl(dir.path() / "p.jsonl"); }), ErrorCode::kLoad);
}

}  // namespace
}  // namespace lace
