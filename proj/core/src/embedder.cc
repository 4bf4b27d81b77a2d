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

#include "lace/embedder.h"

#include <algorithm>
#include <cstdlib>
#include <mutex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lace/error.h"

namespace lace {

using nlohmann::json;

std::string_view TextKindName(TextKind kind) {
  return kind == TextKind::kSentence ? "sentence" : "concept";
}

SidecarClient::SidecarClient(std::string base_url, int max_attempts,
                             double timeout_seconds)
    : base_url_(std::move(base_url)),
      max_attempts_(std::max(1, max_attempts)),
      timeout_seconds_(timeout_seconds) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::unique_ptr<SidecarClient> SidecarClient::FromEnvironment() {
  const char* url = std::getenv("LACE_SIDECAR_URL");
  if (url == nullptr || *url == '\0') return nullptr;
  return std::make_unique<SidecarClient>(url);
}

Matrix SidecarClient::Embed(TextKind kind,
                            const std::vector<std::string>& texts) {
  httplib::Client client(base_url_);
  const auto secs = static_cast<time_t>(timeout_seconds_);
  const auto usecs = static_cast<time_t>((timeout_seconds_ - secs) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  const std::string body =
      json{{"kind", std::string(TextKindName(kind))}, {"texts", texts}}.dump();

  std::string last_error;
  for (int attempt = 1; attempt <= max_attempts_; ++attempt) {
    auto res = client.Post("/embed", body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      // Client errors will not improve on retry.
      if (res->status >= 400 && res->status < 500) break;
      continue;
    }
    json j;
    try {
      j = json::parse(res->body);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kValidation,
                  std::string("sidecar returned malformed JSON: ") + e.what());
    }
    const auto dim = j.at("dim").get<Eigen::Index>();
    const auto& vectors = j.at("vectors");
    if (vectors.size() != texts.size()) {
      throw Error(ErrorCode::kValidation,
                  "sidecar returned " + std::to_string(vectors.size()) +
                      " vectors for " + std::to_string(texts.size()) + " texts");
    }
    Matrix out(static_cast<Eigen::Index>(texts.size()), dim);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const auto v = vectors[i].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(v.size()) != dim) {
        throw Error(ErrorCode::kValidation,
                    "sidecar vector " + std::to_string(i) + " has length " +
                        std::to_string(v.size()) + ", declared dim " +
                        std::to_string(dim));
      }
      for (Eigen::Index e = 0; e < dim; ++e) {
        out(static_cast<Eigen::Index>(i), e) = v[static_cast<std::size_t>(e)];
      }
    }
    if (!out.allFinite()) {
      throw Error(ErrorCode::kValidation, "sidecar returned non-finite values");
    }
    return out;
  }
  throw Error(ErrorCode::kTransport,
              "embedding sidecar at " + base_url_ + " failed after " +
                  std::to_string(max_attempts_) + " attempts: " + last_error,
              "attempts=" + std::to_string(max_attempts_));
}

EmbeddingProvider::EmbeddingProvider(Eigen::Index expected_dim,
                                     std::unique_ptr<EmbeddingClient> remote)
    : dim_(expected_dim), remote_(std::move(remote)) {}

Eigen::Index EmbeddingProvider::dim() const {
  std::shared_lock lock(mu_);
  return dim_;
}

void EmbeddingProvider::CheckDim(Eigen::Index got, const char* source) {
  if (dim_ == 0) dim_ = got;
  if (got != dim_) {
    throw Error(ErrorCode::kValidation,
                std::string(source) + " embedding has dimension " +
                    std::to_string(got) + ", expected " + std::to_string(dim_));
  }
}

void EmbeddingProvider::AddToCache(TextKind kind, const std::string& text,
                                   const Vector& vec) {
  std::unique_lock lock(mu_);
  CheckDim(vec.size(), "cached");
  cache_.insert_or_assign({kind, text}, vec);
}

void EmbeddingProvider::SeedFromInventory(const ConceptInventory& inventory) {
  for (const Concept& c : inventory.concepts()) {
    AddToCache(TextKind::kConcept, c.text, c.embedding);
  }
}

void EmbeddingProvider::LoadCacheFile(const std::filesystem::path& path) {
  const EmbeddingTable table = ReadEmbeddings(path);
  for (const EmbeddingRecord& r : table.records()) {
    if (r.kind == RecordKind::kDocument) continue;
    Vector v(static_cast<Eigen::Index>(r.vec.size()));
    for (std::size_t i = 0; i < r.vec.size(); ++i) v[i] = r.vec[i];
    AddToCache(r.kind == RecordKind::kSentence ? TextKind::kSentence
                                               : TextKind::kConcept,
               r.id, v);
  }
}

std::optional<Vector> EmbeddingProvider::Lookup(TextKind kind,
                                                const std::string& text) const {
  std::shared_lock lock(mu_);
  auto it = cache_.find({kind, text});
  if (it == cache_.end()) return std::nullopt;
  return it->second;
}

Matrix EmbeddingProvider::Embed(TextKind kind,
                                const std::vector<std::string>& texts) {
  if (texts.empty()) {
    throw Error(ErrorCode::kInvalidInput, "embed_texts needs at least one text");
  }
  std::vector<std::optional<Vector>> rows(texts.size());
  std::vector<std::string> misses;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    rows[i] = Lookup(kind, texts[i]);
    if (!rows[i] && std::find(misses.begin(), misses.end(), texts[i]) == misses.end()) {
      misses.push_back(texts[i]);
    }
  }
  if (!misses.empty()) {
    if (!remote_) {
      throw Error(ErrorCode::kConfiguration,
                  "no embedding for '" + misses.front() +
                      "' in cache and no sidecar configured (set "
                      "LACE_SIDECAR_URL)");
    }
    const Matrix fetched = remote_->Embed(kind, misses);
    {
      std::unique_lock lock(mu_);
      CheckDim(fetched.cols(), "sidecar");
      for (std::size_t i = 0; i < misses.size(); ++i) {
        // First writer wins so a text keeps one vector per process.
        cache_.try_emplace({kind, misses[i]},
                           fetched.row(static_cast<Eigen::Index>(i)).transpose());
      }
    }
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (!rows[i]) rows[i] = Lookup(kind, texts[i]);
    }
  }
  Matrix out(static_cast<Eigen::Index>(texts.size()), rows.front()->size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = rows[i]->transpose();
  }
  return out;
}

Vector EmbeddingProvider::EmbedOne(TextKind kind, const std::string& text) {
  return Embed(kind, {text}).row(0).transpose();
}

}  // namespace lace
