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

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "lace/ot.h"
#include "lace/profile.h"
#include "lace/ranker.h"

namespace {

lace::Matrix Random(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  lace::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

void BM_Sinkhorn(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const lace::CostMatrix c = lace::PairwiseL2(Random(rng, n, 64), Random(rng, n, 64));
  const auto marg = lace::MarginalPair::Uniform(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(lace::Sinkhorn(c, marg, lace::OtConfig{}));
}
BENCHMARK(BM_Sinkhorn)->Arg(2)->Arg(8)->Arg(40);

void BM_ScoreCandidate(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const lace::Matrix active = Random(rng, 10, 64);
  const lace::Matrix sentences = Random(rng, state.range(0), 64);
  const lace::RankConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(lace::ScoreCandidate(active, sentences, cfg));
}
BENCHMARK(BM_ScoreCandidate)->Arg(1)->Arg(4)->Arg(8);

void BM_RankFullScan(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::vector<lace::Document> docs(static_cast<std::size_t>(state.range(0)));
  std::vector<const lace::Document*> ptrs;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    docs[i].doc_id = "c" + std::to_string(i);
    docs[i].sentence_embeddings = Random(rng, 1 + static_cast<Eigen::Index>(i % 8), 64);
    docs[i].sentences.assign(static_cast<std::size_t>(docs[i].sentence_embeddings.rows()), "s");
    ptrs.push_back(&docs[i]);
  }
  auto lib = std::make_shared<lace::LibrarySentences>();
  lib->embeddings = Random(rng, 40, 64);
  lib->index.resize(40);
  std::vector<lace::ProfileConcept> concepts;
  const lace::Matrix k = Random(rng, 10, 64);
  for (Eigen::Index r = 0; r < k.rows(); ++r) {
    concepts.push_back({"k" + std::to_string(r), "t" + std::to_string(r), k.row(r).transpose(),
                        lace::ConceptState::kNeutral, lace::ConceptSource::kRetrieved, 0.0});
  }
  const lace::UserProfile profile("u", concepts, lib, lace::OtConfig{});
  lace::RankConfig cfg;
  cfg.num_threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(lace::Rank(profile, ptrs, cfg, 30));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankFullScan)->Args({1000, 1})->Args({10000, 1})->Args({10000, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
