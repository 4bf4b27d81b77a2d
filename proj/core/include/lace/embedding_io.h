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

#ifndef LACE_EMBEDDING_IO_H_
#define LACE_EMBEDDING_IO_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lace {

enum class RecordKind : std::uint8_t {
  kSentence = 0,
  kConcept = 1,
  kDocument = 2,
};

std::string_view RecordKindName(RecordKind kind);
RecordKind ParseRecordKind(std::string_view name);

struct EmbeddingRecord {
  std::string id;
  RecordKind kind = RecordKind::kSentence;
  std::vector<float> vec;

  bool operator==(const EmbeddingRecord&) const = default;
};

// Sentence records are keyed "{doc_id}#{sentence_index}".
std::string SentenceRecordId(std::string_view doc_id, std::size_t index);

// All records of one embeddings file. Dimension is uniform and (kind, id)
// pairs are unique.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::uint32_t dim) : dim_(dim) {}

  // Throws kLoad on a dimension conflict or a duplicate (kind, id).
  void Add(EmbeddingRecord record);

  std::uint32_t dim() const { return dim_; }
  std::size_t size() const { return records_.size(); }
  const std::vector<EmbeddingRecord>& records() const { return records_; }
  const EmbeddingRecord* Find(RecordKind kind, std::string_view id) const;

 private:
  std::uint32_t dim_ = 0;
  std::vector<EmbeddingRecord> records_;
  std::map<std::pair<RecordKind, std::string>, std::size_t, std::less<>> index_;
};

inline constexpr std::string_view kBinaryMagic = "LACEEMB1";

// Binary layout (little endian): magic, u32 dim, u64 count, then per record
// u8 kind, u32 id length, id bytes, dim x f32.
void WriteEmbeddingsBinary(std::ostream& out, const EmbeddingTable& table);
void WriteEmbeddingsBinary(const std::filesystem::path& path,
                           const EmbeddingTable& table);
EmbeddingTable ReadEmbeddingsBinary(std::istream& in);

// One {"id","kind","vec"} object per line.
void WriteEmbeddingsJsonl(std::ostream& out, const EmbeddingTable& table);
void WriteEmbeddingsJsonl(const std::filesystem::path& path,
                          const EmbeddingTable& table);
EmbeddingTable ReadEmbeddingsJsonl(std::istream& in);

// Sniffs the magic bytes and dispatches to the binary or JSONL reader.
EmbeddingTable ReadEmbeddings(const std::filesystem::path& path);

}  // namespace lace

#endif  // LACE_EMBEDDING_IO_H_
