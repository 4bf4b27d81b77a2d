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

#include "lace/embedding_io.h"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lace/error.h"

namespace lace {
namespace {

using nlohmann::json;

static_assert(sizeof(float) == 4);

template <typename T>
void PutLe(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T GetLe(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw Error(ErrorCode::kLoad,
                std::string("truncated embeddings file while reading ") +
                    what);
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(bytes[i]) << (8 * i);
  }
  return value;
}

}  // namespace

std::string_view RecordKindName(RecordKind kind) {
  switch (kind) {
    case RecordKind::kSentence:
      return "sentence";
    case RecordKind::kConcept:
      return "concept";
    case RecordKind::kDocument:
      return "document";
  }
  return "sentence";
}

RecordKind ParseRecordKind(std::string_view name) {
  if (name == "sentence") return RecordKind::kSentence;
  if (name == "concept") return RecordKind::kConcept;
  if (name == "document") return RecordKind::kDocument;
  throw Error(ErrorCode::kLoad,
              "unknown embedding kind '" + std::string(name) + "'");
}

std::string SentenceRecordId(std::string_view doc_id, std::size_t index) {
  return std::string(doc_id) + "#" + std::to_string(index);
}

void EmbeddingTable::Add(EmbeddingRecord record) {
  if (dim_ == 0) {
    if (record.vec.empty()) {
      throw Error(ErrorCode::kLoad, "embedding '" + record.id + "' is empty");
    }
    dim_ = static_cast<std::uint32_t>(record.vec.size());
  }
  if (record.vec.size() != dim_) {
    throw Error(ErrorCode::kLoad,
                "embedding '" + record.id + "' has dimension " +
                    std::to_string(record.vec.size()) + ", file dimension is " +
                    std::to_string(dim_));
  }
  for (float v : record.vec) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kLoad,
                  "embedding '" + record.id + "' has a non-finite entry");
    }
  }
  auto key = std::make_pair(record.kind, record.id);
  if (index_.contains(key)) {
    throw Error(ErrorCode::kLoad,
                "duplicate " + std::string(RecordKindName(record.kind)) +
                    " embedding '" + record.id + "'");
  }
  index_.emplace(std::move(key), records_.size());
  records_.push_back(std::move(record));
}

const EmbeddingRecord* EmbeddingTable::Find(RecordKind kind,
                                            std::string_view id) const {
  auto it = index_.find(std::make_pair(kind, std::string(id)));
  return it == index_.end() ? nullptr : &records_[it->second];
}

void WriteEmbeddingsBinary(std::ostream& out, const EmbeddingTable& table) {
  out.write(kBinaryMagic.data(), kBinaryMagic.size());
  PutLe<std::uint32_t>(out, table.dim());
  PutLe<std::uint64_t>(out, table.size());
  for (const EmbeddingRecord& r : table.records()) {
    PutLe<std::uint8_t>(out, static_cast<std::uint8_t>(r.kind));
    PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(r.id.size()));
    out.write(r.id.data(), static_cast<std::streamsize>(r.id.size()));
    for (float v : r.vec) PutLe<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw Error(ErrorCode::kLoad, "failed writing embeddings");
}

void WriteEmbeddingsBinary(const std::filesystem::path& path,
                           const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kLoad, "cannot open " + path.string());
  WriteEmbeddingsBinary(out, table);
}

EmbeddingTable ReadEmbeddingsBinary(std::istream& in) {
  std::array<char, 8> magic;
  if (!in.read(magic.data(), magic.size()) ||
      std::string_view(magic.data(), magic.size()) != kBinaryMagic) {
    throw Error(ErrorCode::kLoad, "bad embeddings magic, expected LACEEMB1");
  }
  const auto dim = GetLe<std::uint32_t>(in, "dim");
  const auto count = GetLe<std::uint64_t>(in, "count");
  EmbeddingTable table(dim);
  for (std::uint64_t n = 0; n < count; ++n) {
    EmbeddingRecord r;
    const auto kind = GetLe<std::uint8_t>(in, "kind");
    if (kind > 2) {
      throw Error(ErrorCode::kLoad,
                  "bad record kind " + std::to_string(kind) + " at record " +
                      std::to_string(n));
    }
    r.kind = static_cast<RecordKind>(kind);
    const auto len = GetLe<std::uint32_t>(in, "id length");
    r.id.resize(len);
    if (!in.read(r.id.data(), len)) {
      throw Error(ErrorCode::kLoad, "truncated embeddings file in record id");
    }
    r.vec.resize(dim);
    for (std::uint32_t e = 0; e < dim; ++e) {
      r.vec[e] = std::bit_cast<float>(GetLe<std::uint32_t>(in, "vector"));
    }
    table.Add(std::move(r));
  }
  return table;
}

void WriteEmbeddingsJsonl(std::ostream& out, const EmbeddingTable& table) {
  for (const EmbeddingRecord& r : table.records()) {
    json line = {{"id", r.id},
                 {"kind", std::string(RecordKindName(r.kind))},
                 {"vec", r.vec}};
    out << line.dump() << '\n';
  }
}

void WriteEmbeddingsJsonl(const std::filesystem::path& path,
                          const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kLoad, "cannot open " + path.string());
  WriteEmbeddingsJsonl(out, table);
}

EmbeddingTable ReadEmbeddingsJsonl(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      EmbeddingRecord r;
      r.id = j.at("id").get<std::string>();
      r.kind = ParseRecordKind(j.value("kind", std::string("sentence")));
      r.vec = j.at("vec").get<std::vector<float>>();
      table.Add(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kLoad, "malformed embeddings line " +
                                        std::to_string(line_no) + ": " +
                                        e.what());
    }
  }
  return table;
}

EmbeddingTable ReadEmbeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kLoad, "cannot open " + path.string());
  std::array<char, 8> head{};
  in.read(head.data(), head.size());
  const bool binary =
      in.gcount() == 8 &&
      std::string_view(head.data(), head.size()) == kBinaryMagic;
  in.clear();
  in.seekg(0);
  return binary ? ReadEmbeddingsBinary(in) : ReadEmbeddingsJsonl(in);
}

}  // namespace lace
