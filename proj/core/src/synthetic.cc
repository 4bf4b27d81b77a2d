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

#include "lace/synthetic.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "lace/embedding_io.h"
#include "lace/error.h"

namespace lace {
namespace {

using nlohmann::json;

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  Vector Gaussian(Eigen::Index dim, double sd) {
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = sd * normal_(rng_);
    return v;
  }

  int Uniform(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    std::shuffle(v.begin(), v.end(), rng_);
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

Vector RoundToFloat(Vector v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = static_cast<float>(v[i]);
  return v;
}

std::string FacetConceptId(int cluster, int facet) {
  return "c" + std::to_string(cluster) + "f" + std::to_string(facet);
}

Document MakeDocument(Sampler& s, const std::string& id, const Vector& center,
                      const std::string& facet_text, int sentences, double noise) {
  Document d;
  d.doc_id = id;
  d.title = "Notes " + id + " on " + facet_text;
  d.sentence_embeddings.resize(sentences, center.size());
  for (int i = 0; i < sentences; ++i) {
    d.sentences.push_back("Sentence " + std::to_string(i) + " of " + id +
                          " discussing " + facet_text + ".");
    d.sentence_embeddings.row(i) =
        RoundToFloat(center + s.Gaussian(center.size(), noise)).transpose();
  }
  return d;
}

std::vector<float> ToFloats(const Vector& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace

std::string FacetText(int cluster, int facet) {
  return "theme " + std::to_string(cluster) + " facet " + std::to_string(facet);
}

std::string SynonymText(const std::string& concept_text) {
  return concept_text + " (synonym)";
}

std::string EditTarget(const UserProfile& profile,
                       const std::string& primary_concept_id) {
  if (profile.IndexOf(primary_concept_id)) return primary_concept_id;
  return profile.concepts().front().concept_id;
}

std::string SelectionTarget(const UserProfile& profile, std::size_t user_index) {
  return profile.concepts()[user_index % profile.size()].concept_id;
}

std::pair<std::string, Vector> SyntheticWorld::Synonym(
    const std::string& concept_id) const {
  const Concept* c = inventory.Find(concept_id);
  auto it = synonym_embeddings.find(concept_id);
  if (c == nullptr || it == synonym_embeddings.end()) {
    throw Error(ErrorCode::kNotFound, "no synonym for concept '" + concept_id + "'");
  }
  return {SynonymText(c->text), it->second};
}

std::vector<const Document*> SyntheticWorld::Candidates() const {
  std::vector<const Document*> out;
  out.reserve(candidate_ids.size());
  for (const std::string& id : candidate_ids) out.push_back(&corpus.Get(id));
  return out;
}

DocMatcher SyntheticWorld::FacetMatcher(const std::string& concept_id) const {
  return [this, concept_id](const Document& d) {
    auto it = doc_facet.find(d.doc_id);
    return it != doc_facet.end() && it->second == concept_id;
  };
}

SyntheticWorld GenerateSyntheticWorld(const SyntheticSpec& spec) {
  if (spec.clusters < spec.interests_per_user + 1 ||
      spec.facets_per_cluster < spec.facets_per_interest ||
      spec.facets_per_interest < 1 || spec.dim < 1) {
    throw Error(ErrorCode::kInvalidInput, "inconsistent synthetic spec");
  }
  Sampler s(spec.seed);
  const Eigen::Index dim = spec.dim;

  // facet_centers[c][f]
  std::vector<std::vector<Vector>> facet_centers(spec.clusters);
  std::vector<Concept> concepts;
  for (int c = 0; c < spec.clusters; ++c) {
    const Vector center = s.Gaussian(dim, spec.cluster_spread);
    for (int f = 0; f < spec.facets_per_cluster; ++f) {
      facet_centers[c].push_back(
          RoundToFloat(center + s.Gaussian(dim, spec.facet_spread)));
      concepts.push_back({FacetConceptId(c, f), FacetText(c, f), facet_centers[c][f]});
    }
  }
  for (int n = 0; n < spec.distractor_concepts; ++n) {
    concepts.push_back({"d" + std::to_string(n), "distractor " + std::to_string(n),
                        RoundToFloat(s.Gaussian(dim, 1.5 * spec.cluster_spread))});
  }
  std::unordered_map<std::string, Vector> synonyms;
  for (const Concept& c : concepts) {
    synonyms.emplace(c.concept_id,
                     RoundToFloat(c.embedding + s.Gaussian(dim, spec.synonym_noise)));
  }

  std::vector<Document> docs;
  std::unordered_map<std::string, std::string> doc_facet;

  // Candidate topics before ids are assigned: (topic, cluster, facet, owner).
  struct PendingCandidate {
    Vector topic;
    int cluster;
    int facet;
    int owner;  // user index for held-out candidates, -1 otherwise
  };
  std::vector<PendingCandidate> pending;

  std::vector<SyntheticUser> users;
  for (int u = 0; u < spec.users; ++u) {
    char uid[32];
    std::snprintf(uid, sizeof(uid), "user%03d", u);
    SyntheticUser user;
    user.library.user_id = uid;
    user.judgment.user_id = uid;

    std::vector<int> clusters(spec.clusters);
    std::iota(clusters.begin(), clusters.end(), 0);
    s.Shuffle(clusters);
    std::vector<std::pair<int, int>> facets;  // (cluster, facet)
    for (int i = 0; i < spec.interests_per_user; ++i) {
      std::vector<int> fs(spec.facets_per_cluster);
      std::iota(fs.begin(), fs.end(), 0);
      s.Shuffle(fs);
      for (int j = 0; j < spec.facets_per_interest; ++j) {
        facets.emplace_back(clusters[i], fs[j]);
      }
    }
    const auto [pc, pf] = facets.front();
    user.primary_concept_id = FacetConceptId(pc, pf);

    int doc_n = 0;
    for (std::size_t i = 0; i < facets.size(); ++i) {
      const auto [c, f] = facets[i];
      const int count = i == 0 ? spec.primary_docs : spec.secondary_docs;
      for (int k = 0; k < count; ++k) {
        const std::string id = std::string(uid) + "_doc" + std::to_string(doc_n++);
        const Vector topic = facet_centers[c][f] + s.Gaussian(dim, spec.topic_spread);
        docs.push_back(MakeDocument(s, id, topic, FacetText(c, f),
                                    spec.library_sentences, spec.sentence_noise));
        doc_facet.emplace(id, FacetConceptId(c, f));
        user.library.doc_ids.push_back(id);
        for (int h = 0; h < spec.heldout_per_doc; ++h) {
          pending.push_back(
              {topic + s.Gaussian(dim, spec.heldout_spread), c, f, u});
        }
      }
    }

    const int far_cluster = clusters[spec.interests_per_user];
    user.antonym_text = FacetText(far_cluster, 0) + " (contrast)";
    user.antonym_embedding = facet_centers[far_cluster][0];
    users.push_back(std::move(user));
  }

  if (static_cast<int>(pending.size()) > spec.candidates) {
    throw Error(ErrorCode::kInvalidInput,
                "held-out candidates exceed the candidate count");
  }
  const int facets_total = spec.clusters * spec.facets_per_cluster;
  for (int n = 0; static_cast<int>(pending.size()) < spec.candidates; ++n) {
    const int flat = n % facets_total;
    const int c = flat / spec.facets_per_cluster;
    const int f = flat % spec.facets_per_cluster;
    pending.push_back(
        {facet_centers[c][f] + s.Gaussian(dim, spec.topic_spread), c, f, -1});
  }
  // Ids are assigned after shuffling so that id order carries no signal.
  s.Shuffle(pending);

  std::vector<std::string> candidate_ids;
  for (std::size_t n = 0; n < pending.size(); ++n) {
    const PendingCandidate& p = pending[n];
    char id[32];
    std::snprintf(id, sizeof(id), "cand%05zu", n);
    docs.push_back(MakeDocument(
        s, id, p.topic, FacetText(p.cluster, p.facet),
        s.Uniform(spec.min_candidate_sentences, spec.max_candidate_sentences),
        spec.sentence_noise));
    doc_facet.emplace(id, FacetConceptId(p.cluster, p.facet));
    if (p.owner >= 0) users[p.owner].judgment.relevant_doc_ids.insert(id);
    candidate_ids.push_back(id);
  }

  SyntheticWorld world{spec,          Corpus(std::move(docs)),
                       ConceptInventory(std::move(concepts)),
                       std::move(candidate_ids), std::move(users),
                       std::move(doc_facet), std::move(synonyms)};
  return world;
}

void WriteSyntheticWorld(const SyntheticWorld& world,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  WriteDocumentsJsonl(dir / "documents.jsonl", world.corpus.documents());
  WriteEmbeddingsBinary(dir / "embeddings.bin",
                        ToEmbeddingTable(world.corpus.documents()));
  WriteInventoryJsonl(dir / "inventory.jsonl", world.inventory);
  {
    std::ofstream candidates(dir / "candidates.txt");
    for (const std::string& id : world.candidate_ids) candidates << id << '\n';
  }

  std::ofstream users(dir / "users.jsonl");
  std::ofstream judgments(dir / "judgments.jsonl");
  EmbeddingTable cache;
  for (const SyntheticUser& u : world.users) {
    users << json{{"user_id", u.library.user_id},
                  {"doc_ids", u.library.doc_ids},
                  {"primary_concept_id", u.primary_concept_id},
                  {"antonym", u.antonym_text}}
                 .dump()
          << '\n';
    std::vector<std::string> relevant(u.judgment.relevant_doc_ids.begin(),
                                      u.judgment.relevant_doc_ids.end());
    std::sort(relevant.begin(), relevant.end());
    judgments << json{{"user_id", u.library.user_id}, {"relevant_doc_ids", relevant}}
                     .dump()
              << '\n';
    if (!cache.Find(RecordKind::kConcept, u.antonym_text)) {
      cache.Add({u.antonym_text, RecordKind::kConcept, ToFloats(u.antonym_embedding)});
    }
  }
  std::ofstream synonyms(dir / "synonyms.jsonl");
  for (const Concept& c : world.inventory.concepts()) {
    const auto [text, embedding] = world.Synonym(c.concept_id);
    synonyms << json{{"concept_id", c.concept_id}, {"replacement", text}}.dump()
             << '\n';
    if (!cache.Find(RecordKind::kConcept, text)) {
      cache.Add({text, RecordKind::kConcept, ToFloats(embedding)});
    }
  }
  WriteEmbeddingsJsonl(dir / "text_cache.jsonl", cache);
}

std::vector<UserProfile> BuildUserProfiles(const SyntheticWorld& world,
                                           double retain_fraction,
                                           const OtConfig& cfg,
                                           std::size_t max_users) {
  const std::size_t n = max_users == 0 ? world.users.size()
                                       : std::min(max_users, world.users.size());
  std::vector<UserProfile> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(BuildProfile(world.users[i].library, world.corpus, world.inventory,
                               retain_fraction, cfg));
  }
  return out;
}

SimulationReport RunSelectionProtocol(const SyntheticWorld& world,
                                      std::span<const UserProfile> profiles,
                                      Polarity polarity, const RankConfig& cfg,
                                      std::size_t k, ConceptRecallNorm norm) {
  std::vector<SelectionTrial> trials;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    trials.push_back({profiles[i], SelectionTarget(profiles[i], i), {}});
  }
  return SimulateSelection(std::move(trials), world.Candidates(), polarity, cfg, k, norm);
}

SimulationReport RunSynonymProtocol(const SyntheticWorld& world,
                                    std::span<const UserProfile> profiles,
                                    bool antonym, const RankConfig& cfg,
                                    std::size_t k) {
  std::vector<SynonymTrial> trials;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const SyntheticUser& u = world.users[i];
    const std::string target = EditTarget(profiles[i], u.primary_concept_id);
    if (antonym) {
      trials.push_back({profiles[i], target, u.antonym_text, u.antonym_embedding, u.judgment});
    } else {
      auto [text, embedding] = world.Synonym(target);
      trials.push_back({profiles[i], target, std::move(text), std::move(embedding),
                        u.judgment});
    }
  }
  SimulationReport report =
      SimulateSynonymEdit(std::move(trials), world.Candidates(), cfg, k);
  if (antonym) report.protocol = "antonym_control";
  return report;
}

SyntheticWorld LoadSyntheticWorld(const std::filesystem::path& dir) {
  Corpus corpus = LoadCorpus(dir);
  ConceptInventory inventory = LoadInventory(dir / "inventory.jsonl");
  const EmbeddingTable cache = ReadEmbeddings(dir / "text_cache.jsonl");
  auto cached = [&](const std::string& text) {
    const EmbeddingRecord* r = cache.Find(RecordKind::kConcept, text);
    if (r == nullptr) {
      throw Error(ErrorCode::kLoad, "text cache has no vector for '" + text + "'");
    }
    Vector v(static_cast<Eigen::Index>(r->vec.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = r->vec[static_cast<std::size_t>(i)];
    return v;
  };

  std::vector<std::string> candidate_ids;
  {
    std::ifstream in(dir / "candidates.txt");
    if (!in) throw Error(ErrorCode::kLoad, "missing candidates.txt", dir.string());
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) candidate_ids.push_back(line);
    }
  }

  std::unordered_map<std::string, Judgment> judgments;
  for (Judgment& j : ReadJudgmentsJsonl(dir / "judgments.jsonl")) {
    judgments.emplace(j.user_id, std::move(j));
  }

  std::vector<SyntheticUser> users;
  {
    std::ifstream in(dir / "users.jsonl");
    if (!in) throw Error(ErrorCode::kLoad, "missing users.jsonl", dir.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      SyntheticUser u;
      u.library.user_id = j.at("user_id").get<std::string>();
      u.library.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
      u.primary_concept_id = j.at("primary_concept_id").get<std::string>();
      u.antonym_text = j.at("antonym").get<std::string>();
      u.antonym_embedding = cached(u.antonym_text);
      auto it = judgments.find(u.library.user_id);
      if (it != judgments.end()) u.judgment = it->second;
      u.judgment.user_id = u.library.user_id;
      users.push_back(std::move(u));
    }
  }

  std::unordered_map<std::string, Vector> synonyms;
  {
    std::ifstream in(dir / "synonyms.jsonl");
    if (!in) throw Error(ErrorCode::kLoad, "missing synonyms.jsonl", dir.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      synonyms.emplace(j.at("concept_id").get<std::string>(),
                       cached(j.at("replacement").get<std::string>()));
    }
  }

  return SyntheticWorld{SyntheticSpec{},         std::move(corpus),
                        std::move(inventory),    std::move(candidate_ids),
                        std::move(users),        {},
                        std::move(synonyms)};
}

}  // namespace lace
