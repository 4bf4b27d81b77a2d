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

#ifndef LACE_EMBEDDER_H_
#define LACE_EMBEDDER_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "lace/corpus.h"
#include "lace/ot.h"

namespace lace {

enum class TextKind { kSentence, kConcept };

std::string_view TextKindName(TextKind kind);

// Remote source of text embeddings.
class EmbeddingClient {
 public:
  virtual ~EmbeddingClient() = default;
  // One row per text, in order.
  virtual Matrix Embed(TextKind kind, const std::vector<std::string>& texts) = 0;
};

// Client for the sidecar protocol:
//   POST /embed {"kind": "sentence"|"concept", "texts": [...]}
//     -> 200 {"dim": E, "vectors": [[...], ...]}
class SidecarClient : public EmbeddingClient {
 public:
  explicit SidecarClient(std::string base_url, int max_attempts = 3,
                         double timeout_seconds = 10.0);

  // Reads LACE_SIDECAR_URL; nullptr when unset or empty.
  static std::unique_ptr<SidecarClient> FromEnvironment();

  Matrix Embed(TextKind kind, const std::vector<std::string>& texts) override;

  const std::string& base_url() const { return base_url_; }

 private:
  std::string base_url_;
  int max_attempts_;
  double timeout_seconds_;
};

// Text embedding lookup backed by an in-memory cache and, optionally, a
// remote client. Cache hits never touch the network. Safe for concurrent
// use: reads share a lock, inserts take it exclusively.
class EmbeddingProvider {
 public:
  // `expected_dim` of 0 adopts the dimension of the first vector seen.
  explicit EmbeddingProvider(Eigen::Index expected_dim = 0,
                             std::unique_ptr<EmbeddingClient> remote = nullptr);

  // Throws kValidation on a dimension mismatch.
  void AddToCache(TextKind kind, const std::string& text, const Vector& vec);
  // Every concept text of the inventory becomes a concept-kind cache entry.
  void SeedFromInventory(const ConceptInventory& inventory);
  // Embeddings file whose record ids are the texts themselves; sentence
  // records map to TextKind::kSentence, concept records to kConcept.
  void LoadCacheFile(const std::filesystem::path& path);

  bool HasRemote() const { return remote_ != nullptr; }
  Eigen::Index dim() const;
  std::optional<Vector> Lookup(TextKind kind, const std::string& text) const;

  // Throws kConfiguration when a text is uncached and no remote is set,
  // kTransport from the remote, kValidation on dimension mismatch.
  Matrix Embed(TextKind kind, const std::vector<std::string>& texts);
  Vector EmbedOne(TextKind kind, const std::string& text);

 private:
  void CheckDim(Eigen::Index got, const char* source);

  mutable std::shared_mutex mu_;
  Eigen::Index dim_;
  std::map<std::pair<TextKind, std::string>, Vector> cache_;
  std::unique_ptr<EmbeddingClient> remote_;
};

}  // namespace lace

#endif  // LACE_EMBEDDER_H_
