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

#ifndef LACE_CORPUS_H_
#define LACE_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lace/embedding_io.h"
#include "lace/ot.h"

namespace lace {

// A candidate or library item, pre-segmented into sentences.
struct Document {
  std::string doc_id;
  std::string title;
  std::vector<std::string> sentences;
  // One row per sentence.
  Matrix sentence_embeddings;
  // Set when the embeddings file carries a kind=document record.
  std::optional<Vector> document_embedding;

  // Whole-document vector: the supplied record, else the mean sentence row.
  Vector DocumentEmbedding() const;
};

struct Concept {
  std::string concept_id;
  std::string text;
  Vector embedding;
};

// Immutable document collection with uniform embedding dimension.
class Corpus {
 public:
  Corpus() = default;
  // Throws kLoad on duplicate ids, empty documents, row/sentence count
  // mismatches, non-finite entries, or mixed dimensions.
  explicit Corpus(std::vector<Document> documents);

  std::size_t size() const { return documents_.size(); }
  Eigen::Index dim() const { return dim_; }
  std::span<const Document> documents() const { return documents_; }
  const Document* Find(std::string_view doc_id) const;
  // Throws kNotFound.
  const Document& Get(std::string_view doc_id) const;
  // Pointers into this corpus, in file order.
  std::vector<const Document*> AllDocuments() const;

 private:
  std::vector<Document> documents_;
  std::unordered_map<std::string, std::size_t> index_;
  Eigen::Index dim_ = 0;
};

class ConceptInventory {
 public:
  ConceptInventory() = default;
  // Throws kLoad on duplicate ids, blank text, or mixed dimensions.
  explicit ConceptInventory(std::vector<Concept> concepts);

  std::size_t size() const { return concepts_.size(); }
  Eigen::Index dim() const { return dim_; }
  std::span<const Concept> concepts() const { return concepts_; }
  const Concept* Find(std::string_view concept_id) const;
  // Row i is the embedding of concepts()[i].
  const Matrix& embedding_matrix() const { return matrix_; }

 private:
  std::vector<Concept> concepts_;
  std::unordered_map<std::string, std::size_t> index_;
  Matrix matrix_;
  Eigen::Index dim_ = 0;
};

struct RawDocument {
  std::string doc_id;
  std::string title;
  std::vector<std::string> sentences;
};

std::vector<RawDocument> ReadDocumentsJsonl(const std::filesystem::path& path);
void WriteDocumentsJsonl(const std::filesystem::path& path,
                         std::span<const Document> documents);

// Joins documents with their sentence (and optional document) records.
Corpus AssembleCorpus(std::vector<RawDocument> raw,
                      const EmbeddingTable& embeddings);

Corpus LoadCorpus(const std::filesystem::path& documents_path,
                  const std::filesystem::path& embeddings_path);
// Directory form: documents.jsonl plus embeddings.bin or embeddings.jsonl.
Corpus LoadCorpus(const std::filesystem::path& dir);

// One {"concept_id","text","vec"} object per line.
ConceptInventory LoadInventory(const std::filesystem::path& path);
void WriteInventoryJsonl(const std::filesystem::path& path,
                         const ConceptInventory& inventory);

// Throws kLoad naming both dimensions when they disagree.
void CheckDimensions(const Corpus& corpus, const ConceptInventory& inventory);

EmbeddingTable ToEmbeddingTable(std::span<const Document> documents);

// Case-insensitive, whitespace-trimmed form used for duplicate detection.
std::string NormalizeText(std::string_view text);

}  // namespace lace

#endif  // LACE_CORPUS_H_
