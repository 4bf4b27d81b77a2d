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

#include "lace/corpus.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lace/error.h"

namespace lace {
namespace {

using nlohmann::json;

Vector ToVector(const std::vector<float>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

std::vector<float> ToFloats(const Vector& v) {
  std::vector<float> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i]);
  return out;
}

std::string DimConflict(const std::string& what, Eigen::Index a,
                        Eigen::Index b) {
  return what + ": dimension " + std::to_string(a) + " vs " +
         std::to_string(b);
}

}  // namespace

std::string NormalizeText(std::string_view text) {
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(" \t\r\n");
  std::string out(text.substr(begin, end - begin + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

Vector Document::DocumentEmbedding() const {
  if (document_embedding) return *document_embedding;
  return sentence_embeddings.colwise().mean().transpose();
}

Corpus::Corpus(std::vector<Document> documents)
    : documents_(std::move(documents)) {
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const Document& d = documents_[i];
    if (d.sentences.empty()) {
      throw Error(ErrorCode::kLoad, "document '" + d.doc_id + "' has no sentences");
    }
    if (static_cast<std::size_t>(d.sentence_embeddings.rows()) !=
        d.sentences.size()) {
      throw Error(ErrorCode::kLoad,
                  "document '" + d.doc_id + "' has " +
                      std::to_string(d.sentences.size()) + " sentences but " +
                      std::to_string(d.sentence_embeddings.rows()) +
                      " embedding rows");
    }
    if (!d.sentence_embeddings.allFinite()) {
      throw Error(ErrorCode::kLoad,
                  "document '" + d.doc_id + "' has non-finite embeddings");
    }
    if (dim_ == 0) dim_ = d.sentence_embeddings.cols();
    if (d.sentence_embeddings.cols() != dim_) {
      throw Error(ErrorCode::kLoad,
                  DimConflict("document '" + d.doc_id + "'",
                              d.sentence_embeddings.cols(), dim_));
    }
    if (d.document_embedding && d.document_embedding->size() != dim_) {
      throw Error(ErrorCode::kLoad,
                  DimConflict("document embedding '" + d.doc_id + "'",
                              d.document_embedding->size(), dim_));
    }
    if (!index_.emplace(d.doc_id, i).second) {
      throw Error(ErrorCode::kLoad, "duplicate doc_id '" + d.doc_id + "'");
    }
  }
}

const Document* Corpus::Find(std::string_view doc_id) const {
  auto it = index_.find(std::string(doc_id));
  return it == index_.end() ? nullptr : &documents_[it->second];
}

const Document& Corpus::Get(std::string_view doc_id) const {
  const Document* d = Find(doc_id);
  if (d == nullptr) {
    throw Error(ErrorCode::kNotFound,
                "unknown doc_id '" + std::string(doc_id) + "'");
  }
  return *d;
}

std::vector<const Document*> Corpus::AllDocuments() const {
  std::vector<const Document*> out;
  out.reserve(documents_.size());
  for (const Document& d : documents_) out.push_back(&d);
  return out;
}

ConceptInventory::ConceptInventory(std::vector<Concept> concepts)
    : concepts_(std::move(concepts)) {
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    const Concept& c = concepts_[i];
    if (NormalizeText(c.text).empty()) {
      throw Error(ErrorCode::kLoad, "concept '" + c.concept_id + "' has empty text");
    }
    if (c.embedding.size() == 0 || !c.embedding.allFinite()) {
      throw Error(ErrorCode::kLoad,
                  "concept '" + c.concept_id + "' has an invalid embedding");
    }
    if (dim_ == 0) dim_ = c.embedding.size();
    if (c.embedding.size() != dim_) {
      throw Error(ErrorCode::kLoad, DimConflict("concept '" + c.concept_id + "'",
                                                c.embedding.size(), dim_));
    }
    if (!index_.emplace(c.concept_id, i).second) {
      throw Error(ErrorCode::kLoad,
                  "duplicate concept_id '" + c.concept_id + "'");
    }
  }
  matrix_.resize(static_cast<Eigen::Index>(concepts_.size()), dim_);
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    matrix_.row(static_cast<Eigen::Index>(i)) = concepts_[i].embedding.transpose();
  }
}

const Concept* ConceptInventory::Find(std::string_view concept_id) const {
  auto it = index_.find(std::string(concept_id));
  return it == index_.end() ? nullptr : &concepts_[it->second];
}

std::vector<RawDocument> ReadDocumentsJsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kLoad, "cannot open " + path.string());
  std::vector<RawDocument> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      RawDocument d;
      d.doc_id = j.at("doc_id").get<std::string>();
      d.title = j.value("title", std::string());
      d.sentences = j.at("sentences").get<std::vector<std::string>>();
      out.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kLoad, path.string() + " line " +
                                        std::to_string(line_no) + ": " +
                                        e.what());
    }
  }
  return out;
}

void WriteDocumentsJsonl(const std::filesystem::path& path,
                         std::span<const Document> documents) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kLoad, "cannot open " + path.string());
  for (const Document& d : documents) {
    out << json{{"doc_id", d.doc_id}, {"title", d.title}, {"sentences", d.sentences}}
               .dump()
        << '\n';
  }
}

Corpus AssembleCorpus(std::vector<RawDocument> raw,
                      const EmbeddingTable& embeddings) {
  std::vector<Document> docs;
  docs.reserve(raw.size());
  const auto dim = static_cast<Eigen::Index>(embeddings.dim());
  for (RawDocument& r : raw) {
    Document d;
    d.doc_id = std::move(r.doc_id);
    d.title = std::move(r.title);
    d.sentences = std::move(r.sentences);
    d.sentence_embeddings.resize(static_cast<Eigen::Index>(d.sentences.size()), dim);
    for (std::size_t s = 0; s < d.sentences.size(); ++s) {
      const EmbeddingRecord* rec =
          embeddings.Find(RecordKind::kSentence, SentenceRecordId(d.doc_id, s));
      if (rec == nullptr) {
        throw Error(ErrorCode::kLoad, "missing embedding for document '" +
                                          d.doc_id + "' sentence " +
                                          std::to_string(s));
      }
      d.sentence_embeddings.row(static_cast<Eigen::Index>(s)) =
          ToVector(rec->vec).transpose();
    }
    if (const EmbeddingRecord* rec =
            embeddings.Find(RecordKind::kDocument, d.doc_id)) {
      d.document_embedding = ToVector(rec->vec);
    }
    docs.push_back(std::move(d));
  }
  return Corpus(std::move(docs));
}

Corpus LoadCorpus(const std::filesystem::path& documents_path,
                  const std::filesystem::path& embeddings_path) {
  return AssembleCorpus(ReadDocumentsJsonl(documents_path),
                        ReadEmbeddings(embeddings_path));
}

Corpus LoadCorpus(const std::filesystem::path& dir) {
  const auto docs = dir / "documents.jsonl";
  for (const char* name : {"embeddings.bin", "embeddings.jsonl"}) {
    if (std::filesystem::exists(dir / name)) return LoadCorpus(docs, dir / name);
  }
  throw Error(ErrorCode::kLoad, "no embeddings.bin or embeddings.jsonl in " +
                                    dir.string());
}

ConceptInventory LoadInventory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kLoad, "cannot open " + path.string());
  std::vector<Concept> concepts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Concept c;
      c.concept_id = j.at("concept_id").get<std::string>();
      c.text = j.at("text").get<std::string>();
      c.embedding = ToVector(j.at("vec").get<std::vector<float>>());
      concepts.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kLoad, path.string() + " line " +
                                        std::to_string(line_no) + ": " +
                                        e.what());
    }
  }
  return ConceptInventory(std::move(concepts));
}

void WriteInventoryJsonl(const std::filesystem::path& path,
                         const ConceptInventory& inventory) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kLoad, "cannot open " + path.string());
  for (const Concept& c : inventory.concepts()) {
    out << json{{"concept_id", c.concept_id},
                {"text", c.text},
                {"vec", ToFloats(c.embedding)}}
               .dump()
        << '\n';
  }
}

void CheckDimensions(const Corpus& corpus, const ConceptInventory& inventory) {
  if (corpus.size() > 0 && inventory.size() > 0 &&
      corpus.dim() != inventory.dim()) {
    throw Error(ErrorCode::kLoad,
                DimConflict("corpus vs inventory", corpus.dim(), inventory.dim()));
  }
}

EmbeddingTable ToEmbeddingTable(std::span<const Document> documents) {
  EmbeddingTable table;
  for (const Document& d : documents) {
    for (Eigen::Index s = 0; s < d.sentence_embeddings.rows(); ++s) {
      table.Add({SentenceRecordId(d.doc_id, static_cast<std::size_t>(s)),
                 RecordKind::kSentence,
                 ToFloats(d.sentence_embeddings.row(s).transpose())});
    }
    if (d.document_embedding) {
      table.Add({d.doc_id, RecordKind::kDocument, ToFloats(*d.document_embedding)});
    }
  }
  return table;
}

}  // namespace lace
