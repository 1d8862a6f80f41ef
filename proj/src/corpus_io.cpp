// Copyright 2026 The weakproj Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "weakproj/corpus_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string_view>

#include "json.hpp"
#include "weakproj/errors.h"

namespace weakproj::io {
namespace {

using nlohmann::json;

[[noreturn]] void Fail(std::size_t line_no, const std::string& what) {
  throw ValidationError("line " + std::to_string(line_no) + ": " + what);
}

std::vector<std::string_view> Split(std::string_view text, char sep) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    std::size_t pos = text.find(sep, begin);
    if (pos == std::string_view::npos) {
      fields.push_back(text.substr(begin));
      return fields;
    }
    fields.push_back(text.substr(begin, pos - begin));
    begin = pos + 1;
  }
}

std::vector<std::string> Tokens(std::string_view text) {
  std::vector<std::string> tokens;
  for (std::string_view piece : Split(text, ' ')) {
    if (!piece.empty()) tokens.emplace_back(piece);
  }
  return tokens;
}

bool ParseId(std::string_view text, SentenceId& id) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
  return ec == std::errc() && ptr == text.data() + text.size() && id >= 0;
}

// Reads one physical line, dropping a trailing CR.
bool NextLine(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

bool IsBlank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

json ParseJsonLine(const std::string& line, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    Fail(line_no, std::string("invalid JSON: ") + e.what());
  }
}

SentenceId JsonId(const json& record, std::size_t line_no) {
  auto it = record.find("id");
  if (it == record.end() || !it->is_number_integer() || it->get<SentenceId>() < 0) {
    Fail(line_no, "missing or invalid \"id\"");
  }
  return it->get<SentenceId>();
}

template <class Fn>
auto WithPath(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in = OpenInput(path);
  try {
    return fn(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::ifstream OpenInput(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  return in;
}

std::vector<SentencePair> ParseParallel(std::istream& in) {
  std::vector<SentencePair> pairs;
  std::set<SentenceId> seen;
  std::string line;
  std::size_t line_no = 0;
  while (NextLine(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = Split(line, '\t');
    if (fields.size() != 3) Fail(line_no, "expected 3 fields");
    SentencePair pair;
    if (!ParseId(fields[0], pair.id)) Fail(line_no, "invalid id");
    pair.src_tokens = Tokens(fields[1]);
    pair.tgt_tokens = Tokens(fields[2]);
    if (pair.src_tokens.empty()) Fail(line_no, "empty source sentence");
    if (pair.tgt_tokens.empty()) Fail(line_no, "empty target sentence");
    if (!seen.insert(pair.id).second) {
      Fail(line_no, "duplicate id " + std::to_string(pair.id));
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<SentencePair> ReadParallel(const std::filesystem::path& path) {
  return WithPath(path, [](std::istream& in) { return ParseParallel(in); });
}

AnnotationMap ParseSourceAnnotations(std::istream& in) {
  AnnotationMap annotations;
  std::string line;
  std::size_t line_no = 0;
  while (NextLine(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    json record = ParseJsonLine(line, line_no);
    if (!record.is_object()) Fail(line_no, "expected a JSON object");
    SentenceId id = JsonId(record, line_no);
    auto spans_it = record.find("spans");
    if (spans_it == record.end() || !spans_it->is_array()) {
      Fail(line_no, "missing \"spans\" array");
    }
    std::vector<EntitySpan> spans;
    for (const json& item : *spans_it) {
      if (!item.is_object()) Fail(line_no, "span must be an object");
      for (const char* key : {"start", "end"}) {
        if (!item.contains(key) || !item[key].is_number_unsigned()) {
          Fail(line_no, std::string("span \"") + key + "\" must be a non-negative integer");
        }
      }
      if (!item.contains("label") || !item["label"].is_string()) {
        Fail(line_no, "span \"label\" must be a string");
      }
      if (!item.contains("score") || !item["score"].is_number()) {
        Fail(line_no, "span \"score\" must be a number");
      }
      EntitySpan span;
      span.start = item["start"].get<std::size_t>();
      span.end = item["end"].get<std::size_t>();
      auto label = ParseEntityType(item["label"].get<std::string>());
      if (!label) Fail(line_no, "unknown label \"" + item["label"].get<std::string>() + "\"");
      span.label = *label;
      span.ner_score = item["score"].get<double>();
      if (!(span.ner_score > 0.0 && span.ner_score <= 1.0)) {
        Fail(line_no, "ner_score out of range (0, 1]");
      }
      if (span.start >= span.end) Fail(line_no, "span start must be < end");
      spans.push_back(span);
    }
    std::stable_sort(spans.begin(), spans.end(),
                     [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < spans.size(); ++i) {
      if (spans[i].start < spans[i - 1].end) Fail(line_no, "overlapping spans");
    }
    if (!annotations.emplace(id, std::move(spans)).second) {
      Fail(line_no, "duplicate id " + std::to_string(id));
    }
  }
  return annotations;
}

AnnotationMap ReadSourceAnnotations(const std::filesystem::path& path) {
  return WithPath(path, [](std::istream& in) { return ParseSourceAnnotations(in); });
}

void CheckAnnotations(const AnnotationMap& annotations,
                      std::span<const SentencePair> corpus) {
  std::map<SentenceId, std::size_t> lengths;
  for (const SentencePair& pair : corpus) lengths[pair.id] = pair.src_tokens.size();
  for (const auto& [id, spans] : annotations) {
    auto it = lengths.find(id);
    if (it == lengths.end()) {
      throw ValidationError("annotation for unknown id " + std::to_string(id));
    }
    for (const EntitySpan& span : spans) {
      if (span.end > it->second) {
        throw ValidationError("span [" + std::to_string(span.start) + ", " +
                              std::to_string(span.end) + ") exceeds source length " +
                              std::to_string(it->second) + " for id " + std::to_string(id));
      }
    }
  }
}

std::span<const EntitySpan> SpansFor(const AnnotationMap& annotations, SentenceId id) {
  auto it = annotations.find(id);
  if (it == annotations.end()) return {};
  return it->second;
}

EmbeddingMap ParseEmbeddings(std::istream& in) {
  EmbeddingMap embeddings;
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index dim = -1;
  while (NextLine(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    json record = ParseJsonLine(line, line_no);
    if (!record.is_object()) Fail(line_no, "expected a JSON object");

    EmbeddingKey key;
    key.id = JsonId(record, line_no);
    const json side = record.value("side", json());
    if (side == "src") {
      key.side = Side::kSource;
    } else if (side == "tgt") {
      key.side = Side::kTarget;
    } else {
      Fail(line_no, "\"side\" must be \"src\" or \"tgt\"");
    }

    EmbeddingSet set;
    const json level = record.value("level", json());
    if (level == "word") {
      set.level = Granularity::kWord;
    } else if (level == "subword") {
      set.level = Granularity::kSubword;
    } else {
      Fail(line_no, "\"level\" must be \"word\" or \"subword\"");
    }

    auto vectors_it = record.find("vectors");
    if (vectors_it == record.end() || !vectors_it->is_array() || vectors_it->empty()) {
      Fail(line_no, "\"vectors\" must be a non-empty array");
    }
    const json& rows = *vectors_it;
    for (const json& row : rows) {
      if (!row.is_array() || row.empty()) Fail(line_no, "each vector must be a non-empty array");
      auto row_dim = static_cast<Eigen::Index>(row.size());
      if (dim < 0) dim = row_dim;
      if (row_dim != dim) {
        Fail(line_no, "dimension mismatch: expected " + std::to_string(dim) + ", got " +
                          std::to_string(row_dim));
      }
    }
    set.vectors.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (Eigen::Index r = 0; r < set.vectors.rows(); ++r) {
      const json& row = rows[static_cast<std::size_t>(r)];
      for (Eigen::Index c = 0; c < dim; ++c) {
        const json& value = row[static_cast<std::size_t>(c)];
        if (!value.is_number()) Fail(line_no, "vector entries must be numbers");
        double v = value.get<double>();
        if (!std::isfinite(v)) Fail(line_no, "non-finite value in vectors");
        set.vectors(r, c) = v;
      }
      if (set.vectors.row(r).norm() == 0.0) {
        Fail(line_no, "zero-norm vector at row " + std::to_string(r));
      }
    }

    const json word_map = record.value("word_map", json());
    if (set.level == Granularity::kWord) {
      if (!word_map.is_null()) Fail(line_no, "word-level record must have null word_map");
    } else {
      if (!word_map.is_array()) Fail(line_no, "subword record requires a word_map array");
      if (word_map.size() != rows.size()) {
        Fail(line_no, "word_map length " + std::to_string(word_map.size()) +
                          " does not match " + std::to_string(rows.size()) + " vectors");
      }
      for (std::size_t i = 0; i < word_map.size(); ++i) {
        if (!word_map[i].is_number_unsigned()) Fail(line_no, "word_map entries must be non-negative integers");
        auto w = word_map[i].get<std::size_t>();
        std::size_t expected_min = i == 0 ? 0 : set.word_map.back();
        std::size_t expected_max = i == 0 ? 0 : set.word_map.back() + 1;
        if (w < expected_min) Fail(line_no, "word_map is not monotone non-decreasing");
        if (w > expected_max) Fail(line_no, "word_map skips a word index");
        set.word_map.push_back(w);
      }
    }

    if (!embeddings.emplace(key, std::move(set)).second) {
      Fail(line_no, "duplicate record for id " + std::to_string(key.id));
    }
  }
  return embeddings;
}

EmbeddingMap ReadEmbeddings(const std::filesystem::path& path) {
  return WithPath(path, [](std::istream& in) { return ParseEmbeddings(in); });
}

void CheckEmbeddingCoversTokens(const EmbeddingSet& set, std::size_t token_count) {
  if (set.WordCount() != token_count) {
    throw ValidationError("embedding covers " + std::to_string(set.WordCount()) +
                          " words but the sentence has " + std::to_string(token_count) +
                          " tokens");
  }
}

void ValidateWeakSentence(const WeakSentence& sentence) {
  const std::string where = "weak sentence " + std::to_string(sentence.id) + ": ";
  if (sentence.tags.size() != sentence.tgt_tokens.size()) {
    throw ValidationError(where + "tag count does not match token count");
  }
  if (!IsBioValid(sentence.tags)) throw ValidationError(where + "tags are not BIO-valid");
  if (!(sentence.sentence_score <= 0.0)) {
    throw ValidationError(where + "sentence score must be <= 0");
  }
  for (const std::string& token : sentence.tgt_tokens) {
    if (token.empty() || token.find_first_of("\t\n") != std::string::npos) {
      throw ValidationError(where + "invalid token");
    }
  }
}

std::string FormatScore(double score) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", score);
  std::string out(buf);
  if (out == "-0.000000") out = "0.000000";
  return out;
}

void WriteConll(std::span<const WeakSentence> sentences, std::ostream& out) {
  for (const WeakSentence& sentence : sentences) ValidateWeakSentence(sentence);
  for (const WeakSentence& sentence : sentences) {
    out << "# id=" << sentence.id << " score=" << FormatScore(sentence.sentence_score) << '\n';
    for (std::size_t i = 0; i < sentence.tgt_tokens.size(); ++i) {
      out << sentence.tgt_tokens[i] << '\t' << ToString(sentence.tags[i]) << '\n';
    }
    out << '\n';
  }
}

void WriteConll(std::span<const WeakSentence> sentences,
                const std::filesystem::path& path) {
  for (const WeakSentence& sentence : sentences) ValidateWeakSentence(sentence);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  WriteConll(sentences, out);
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<WeakSentence> ParseConll(std::istream& in) {
  std::vector<WeakSentence> sentences;
  std::string line;
  std::size_t line_no = 0;
  bool open = false;
  auto close = [&] {
    try {
      ValidateWeakSentence(sentences.back());
    } catch (const ValidationError& e) {
      Fail(line_no, e.what());
    }
    open = false;
  };
  while (NextLine(in, line)) {
    ++line_no;
    if (line.empty()) {
      if (open) close();
      continue;
    }
    if (line.rfind("# ", 0) == 0) {
      if (open) Fail(line_no, "header inside a sentence");
      WeakSentence sentence;
      unsigned long long id = 0;
      char score_buf[64] = {0};
      if (std::sscanf(line.c_str(), "# id=%llu score=%63s", &id, score_buf) != 2) {
        Fail(line_no, "malformed header");
      }
      sentence.id = static_cast<SentenceId>(id);
      char* end = nullptr;
      sentence.sentence_score = std::strtod(score_buf, &end);
      if (end == score_buf || *end != '\0') Fail(line_no, "malformed score");
      sentences.push_back(std::move(sentence));
      open = true;
      continue;
    }
    if (!open) Fail(line_no, "token line outside a sentence");
    auto fields = Split(line, '\t');
    if (fields.size() != 2) Fail(line_no, "expected token<TAB>tag");
    auto tag = ParseTag(fields[1]);
    if (!tag) Fail(line_no, "unknown tag \"" + std::string(fields[1]) + "\"");
    sentences.back().tgt_tokens.emplace_back(fields[0]);
    sentences.back().tags.push_back(*tag);
  }
  if (open) close();
  return sentences;
}

std::vector<WeakSentence> ReadConll(const std::filesystem::path& path) {
  return WithPath(path, [](std::istream& in) { return ParseConll(in); });
}

}  // namespace weakproj::io
