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

// lace: index building, serving, evaluation, simulation and one-off ranking.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lace/embedder.h"
#include "lace/error.h"
#include "lace/http_api.h"
#include "lace/metrics.h"
#include "lace/profile.h"
#include "lace/ranker.h"
#include "lace/service.h"
#include "lace/synthetic.h"

// After Eigen: <resolv.h> defines a _res macro that collides with Eigen.
#include <httplib.h>

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

lace::ServiceConfig LoadConfig(const std::string& path) {
  if (path.empty()) return lace::ServiceConfig{};
  std::ifstream in(path);
  if (!in) throw lace::Error(lace::ErrorCode::kConfiguration, "cannot open config", path);
  return lace::ServiceConfig::FromJson(json::parse(in));
}

std::vector<lace::UserLibrary> ReadLibraries(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw lace::Error(lace::ErrorCode::kLoad, "cannot open users file", path.string());
  std::vector<lace::UserLibrary> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line);
    out.push_back({j.at("user_id").get<std::string>(),
                   j.at("doc_ids").get<std::vector<std::string>>()});
  }
  return out;
}

// Comma-separated ids, or @path for one id per line.
std::vector<std::string> ParseIds(const std::string& arg) {
  std::vector<std::string> ids;
  if (!arg.empty() && arg[0] == '@') {
    std::ifstream in(arg.substr(1));
    if (!in) throw lace::Error(lace::ErrorCode::kLoad, "cannot open id list", arg.substr(1));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) ids.push_back(line);
    }
    return ids;
  }
  std::stringstream ss(arg);
  std::string id;
  while (std::getline(ss, id, ',')) {
    if (!id.empty()) ids.push_back(id);
  }
  return ids;
}

std::vector<const lace::Document*> ExcludeLibrary(const lace::Index& index,
                                                  const lace::UserLibrary& library) {
  const std::set<std::string> own(library.doc_ids.begin(), library.doc_ids.end());
  std::vector<const lace::Document*> out;
  for (const lace::Document* d : index.candidates()) {
    if (!own.count(d->doc_id)) out.push_back(d);
  }
  return out;
}

int BuildIndexCommand(const lace::IndexBuildOptions& options) {
  std::cout << lace::BuildIndex(options).dump(2) << '\n';
  return 0;
}

int ServeCommand(const std::string& index_dir, const std::string& data_dir,
                 const std::string& host, int port, const std::string& config) {
  auto index = lace::Index::Load(index_dir);
  auto provider = lace::MakeEmbeddingProvider(index_dir, *index,
                                              lace::SidecarClient::FromEnvironment());
  lace::Service service(index, LoadConfig(config), provider, fs::path(data_dir));
  std::cerr << "recovery " << service.recovery_report().dump() << '\n';
  httplib::Server server;
  lace::RegisterRoutes(server, service);
  std::cerr << "listening on " << host << ':' << port << '\n';
  if (!server.listen(host, port)) {
    throw lace::Error(lace::ErrorCode::kConfiguration, "cannot listen",
                      host + ":" + std::to_string(port));
  }
  return 0;
}

int EvalCommand(const std::string& index_dir, const std::string& judgments_path,
                std::size_t k, std::string users_path, const std::string& pairs_path,
                const std::string& method, const std::string& config) {
  const lace::ServiceConfig cfg = LoadConfig(config);
  auto index = lace::Index::Load(index_dir);
  if (users_path.empty()) users_path = (fs::path(index_dir) / "users.jsonl").string();
  std::unordered_map<std::string, lace::UserLibrary> libraries;
  for (auto& lib : ReadLibraries(users_path)) libraries.emplace(lib.user_id, lib);
  std::vector<lace::RatedPair> pairs;
  if (!pairs_path.empty()) pairs = lace::ReadRatedPairsJsonl(pairs_path);

  json per_user = json::array();
  double ndcg = 0.0, recall = 0.0, mrr = 0.0;
  std::size_t n = 0, n_recall = 0;
  std::vector<double> pair_acc;
  for (const lace::Judgment& j : lace::ReadJudgmentsJsonl(judgments_path)) {
    auto it = libraries.find(j.user_id);
    if (it == libraries.end()) {
      throw lace::Error(lace::ErrorCode::kNotFound,
                        "no library for judged user '" + j.user_id + "'");
    }
    const auto candidates = ExcludeLibrary(*index, it->second);
    lace::ScoredList ranking;
    std::optional<lace::UserProfile> profile;
    if (method == "neuknn") {
      ranking = lace::RankNeuKnn(it->second, index->corpus(), candidates, candidates.size());
    } else {
      profile = lace::BuildProfile(it->second, index->corpus(), index->inventory(),
                                   cfg.retain_fraction, cfg.rank.ot);
      ranking = lace::Rank(*profile, candidates, cfg.rank, candidates.size());
    }
    json row{{"user_id", j.user_id}};
    const double u_ndcg = lace::NdcgAtK(ranking, j, k);
    const double u_mrr = lace::Mrr(ranking, j);
    row["ndcg"] = u_ndcg;
    row["mrr"] = u_mrr;
    ndcg += u_ndcg;
    mrr += u_mrr;
    ++n;
    if (auto r = lace::RecallAtK(ranking, j, k)) {
      row["recall"] = *r;
      recall += *r;
      ++n_recall;
    } else {
      row["recall"] = nullptr;
    }
    std::vector<lace::RatedPair> mine;
    for (const lace::RatedPair& p : pairs) {
      if (p.user_id == j.user_id) mine.push_back(p);
    }
    if (!mine.empty()) {
      std::unordered_map<std::string, double> scores;
      for (const lace::ScoredEntry& e : ranking.entries()) scores.emplace(e.doc_id, e.score);
      row["pairwise_accuracy"] = lace::PairwiseAccuracy(scores, mine);
      pair_acc.push_back(row["pairwise_accuracy"].get<double>());
    }
    per_user.push_back(std::move(row));
  }
  json out{{"method", method},
           {"k", k},
           {"users", n},
           {"ndcg", n ? ndcg / static_cast<double>(n) : 0.0},
           {"recall", n_recall ? recall / static_cast<double>(n_recall) : 0.0},
           {"mrr", n ? mrr / static_cast<double>(n) : 0.0},
           {"per_user", std::move(per_user)}};
  if (!pair_acc.empty()) {
    double s = 0.0;
    for (double a : pair_acc) s += a;
    out["pairwise_accuracy"] = s / static_cast<double>(pair_acc.size());
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int SimulateCommand(const std::string& index_dir, const std::string& protocol,
                    std::size_t trials, std::size_t k, const std::string& norm,
                    const std::string& config) {
  const lace::ServiceConfig cfg = LoadConfig(config);
  const lace::SyntheticWorld world = lace::LoadSyntheticWorld(index_dir);
  const auto profiles =
      lace::BuildUserProfiles(world, cfg.retain_fraction, cfg.rank.ot, trials);
  json reports = json::array();
  if (protocol == "selection") {
    const auto n = norm == "uncapped" ? lace::ConceptRecallNorm::kUncapped
                                      : lace::ConceptRecallNorm::kCapped;
    for (auto polarity : {lace::Polarity::kPositive, lace::Polarity::kNegative}) {
      reports.push_back(
          lace::RunSelectionProtocol(world, profiles, polarity, cfg.rank, k, n).ToJson());
    }
  } else {
    for (bool antonym : {false, true}) {
      reports.push_back(
          lace::RunSynonymProtocol(world, profiles, antonym, cfg.rank, k).ToJson());
    }
  }
  std::cout << json{{"protocol", protocol}, {"reports", reports}}.dump(2) << '\n';
  return 0;
}

int RankCommand(const std::string& index_dir, const std::string& user_docs,
                std::size_t k, const std::string& first_stage, const std::string& config) {
  const lace::ServiceConfig cfg = LoadConfig(config);
  auto index = lace::Index::Load(index_dir);
  const lace::UserLibrary library{"cli", ParseIds(user_docs)};
  const lace::UserProfile profile = lace::BuildProfile(
      library, index->corpus(), index->inventory(), cfg.retain_fraction, cfg.rank.ot);
  lace::Recommendations rec{"cli", 0, lace::RankMode::kFull, {}};
  if (first_stage.empty()) {
    rec.list = lace::Rank(profile, ExcludeLibrary(*index, library), cfg.rank, k);
  } else {
    rec.mode = lace::RankMode::kRerank;
    const lace::ScoredList all = lace::Rerank(profile, lace::ReadFirstStage(first_stage),
                                              index->candidates(), cfg.rank);
    std::vector<lace::ScoredEntry> head(
        all.entries().begin(),
        all.entries().begin() + static_cast<std::ptrdiff_t>(std::min(k, all.size())));
    rec.list = lace::ScoredList(std::move(head));
  }
  json out = rec.ToJson(index->corpus());
  out["profile"] = lace::ProfileToJson(profile, false);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int SynthCommand(const std::string& out_dir, const lace::SyntheticSpec& spec) {
  const lace::SyntheticWorld world = lace::GenerateSyntheticWorld(spec);
  lace::WriteSyntheticWorld(world, out_dir);
  const auto index = lace::Index::Load(out_dir);
  const json manifest = index->Manifest();
  std::ofstream(fs::path(out_dir) / lace::Index::kManifestFile) << manifest.dump(2) << '\n';
  std::cout << manifest.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lace: concept-profile recommendations"};
  app.require_subcommand(1);

  lace::IndexBuildOptions build;
  std::string build_candidates, build_cache;
  auto* build_cmd = app.add_subcommand("build-index", "Validate inputs and write an index");
  build_cmd->add_option("--docs", build.documents, "documents.jsonl")->required();
  build_cmd->add_option("--embeddings", build.embeddings, "Embeddings file")->required();
  build_cmd->add_option("--inventory", build.inventory, "inventory.jsonl")->required();
  build_cmd->add_option("--out", build.out, "Output directory")->required();
  build_cmd->add_option("--candidates", build_candidates, "Candidate id list");
  build_cmd->add_option("--text-cache", build_cache, "Embeddings of extra concept texts");

  std::string index_dir, data_dir, host = "127.0.0.1", config;
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("--index", index_dir, "Index directory")->required();
  serve_cmd->add_option("--data-dir", data_dir, "Event log and snapshot directory")->required();
  serve_cmd->add_option("--port", port, "Port")->capture_default_str();
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--config", config, "Service config JSON");

  std::string judgments, users, pairs, method = "lace";
  std::size_t k = 20;
  auto* eval_cmd = app.add_subcommand("eval", "NDCG, recall and MRR over judged users");
  eval_cmd->add_option("--index", index_dir, "Index directory")->required();
  eval_cmd->add_option("--judgments", judgments, "judgments.jsonl")->required();
  eval_cmd->add_option("--k", k, "Cutoff")->capture_default_str();
  eval_cmd->add_option("--users", users, "users.jsonl (default: <index>/users.jsonl)");
  eval_cmd->add_option("--pairs", pairs, "Rated pairs for pairwise accuracy");
  eval_cmd->add_option("--method", method, "lace or neuknn")
      ->check(CLI::IsMember({"lace", "neuknn"}))
      ->capture_default_str();
  eval_cmd->add_option("--config", config, "Service config JSON");

  std::string protocol, norm = "capped";
  std::size_t trials = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Selection or synonym protocol on a synthetic world");
  sim_cmd->add_option("--index", index_dir, "Directory written by `lace synth`")->required();
  sim_cmd->add_option("--protocol", protocol, "selection or synonym")
      ->required()
      ->check(CLI::IsMember({"selection", "synonym"}));
  sim_cmd->add_option("--trials", trials, "Users to include (0 = all)")->capture_default_str();
  sim_cmd->add_option("--k", k, "Cutoff")->capture_default_str();
  sim_cmd->add_option("--norm", norm, "Concept recall normalization")
      ->check(CLI::IsMember({"capped", "uncapped"}))
      ->capture_default_str();
  sim_cmd->add_option("--config", config, "Service config JSON");

  std::string user_docs, first_stage;
  std::size_t rank_k = 30;
  auto* rank_cmd = app.add_subcommand("rank", "Rank candidates for an ad-hoc library");
  rank_cmd->add_option("--index", index_dir, "Index directory")->required();
  rank_cmd->add_option("--user-docs", user_docs, "Comma-separated doc ids or @file")->required();
  rank_cmd->add_option("--k", rank_k, "List length")->capture_default_str();
  rank_cmd->add_option("--first-stage", first_stage, "Rerank this first-stage file");
  rank_cmd->add_option("--config", config, "Service config JSON");

  std::string synth_out;
  lace::SyntheticSpec spec;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic clustered world");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--seed", spec.seed, "Seed")->capture_default_str();
  synth_cmd->add_option("--users", spec.users, "Users")->capture_default_str();
  synth_cmd->add_option("--candidates", spec.candidates, "Candidates")->capture_default_str();
  synth_cmd->add_option("--dim", spec.dim, "Embedding dimension")->capture_default_str();

  auto* config_cmd = app.add_subcommand("config", "Print the effective configuration");
  config_cmd->add_option("--config", config, "Service config JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build_cmd) {
      if (!build_candidates.empty()) build.candidates = build_candidates;
      if (!build_cache.empty()) build.text_cache = build_cache;
      return BuildIndexCommand(build);
    }
    if (*serve_cmd) return ServeCommand(index_dir, data_dir, host, port, config);
    if (*eval_cmd) return EvalCommand(index_dir, judgments, k, users, pairs, method, config);
    if (*sim_cmd) return SimulateCommand(index_dir, protocol, trials, k, norm, config);
    if (*rank_cmd) return RankCommand(index_dir, user_docs, rank_k, first_stage, config);
    if (*synth_cmd) return SynthCommand(synth_out, spec);
    if (*config_cmd) {
      std::cout << LoadConfig(config).ToJson().dump(2) << '\n';
      return 0;
    }
  } catch (const lace::Error& e) {
    std::cerr << lace::ErrorBody(lace::ErrorCodeName(e.code()), e.what(), e.detail()).dump()
              << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << lace::ErrorBody("internal", e.what()).dump() << '\n';
    return 1;
  }
  return 0;
}
