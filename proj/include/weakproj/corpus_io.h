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

#ifndef WEAKPROJ_CORPUS_IO_H_
#define WEAKPROJ_CORPUS_IO_H_

#include <compare>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "weakproj/types.h"

// Readers and writers for the on-disk formats:
//
//   parallel corpus   id<TAB>src tokens<TAB>tgt tokens, one pair per line
//   annotations       JSON lines {"id":0,"spans":[{"start","end","label","score"}]}
//   embeddings        JSON lines {"id","side","level","vectors","word_map"}
//   weak CoNLL        "# id=<id> score=<%.6f>", token<TAB>tag lines, blank line
//
// Parse errors are ValidationError with a "line N: " prefix; missing files
// are IoError. The read* functions prefix messages with the file path.
namespace weakproj::io {

std::vector<SentencePair> ParseParallel(std::istream& in);
std::vector<SentencePair> ReadParallel(const std::filesystem::path& path);

using AnnotationMap = std::map<SentenceId, std::vector<EntitySpan>>;

AnnotationMap ParseSourceAnnotations(std::istream& in);
AnnotationMap ReadSourceAnnotations(const std::filesystem::path& path);

// Cross-checks span ends against source lengths and rejects ids that are
// not in the corpus.
void CheckAnnotations(const AnnotationMap& annotations,
                      std::span<const SentencePair> corpus);

// Spans for one sentence; empty when the file had no record for it.
std::span<const EntitySpan> SpansFor(const AnnotationMap& annotations,
                                     SentenceId id);

struct EmbeddingKey {
  SentenceId id = 0;
  Side side = Side::kSource;
  auto operator<=>(const EmbeddingKey&) const = default;
};

using EmbeddingMap = std::map<EmbeddingKey, EmbeddingSet>;

EmbeddingMap ParseEmbeddings(std::istream& in);
EmbeddingMap ReadEmbeddings(const std::filesystem::path& path);

// Throws ValidationError when the set does not cover exactly token_count words.
void CheckEmbeddingCoversTokens(const EmbeddingSet& set, std::size_t token_count);

// Validates the WeakSentence invariants.
void ValidateWeakSentence(const WeakSentence& sentence);

// Fixed-point score with six decimals; negative zero prints as 0.000000.
std::string FormatScore(double score);

void WriteConll(std::span<const WeakSentence> sentences, std::ostream& out);
void WriteConll(std::span<const WeakSentence> sentences,
                const std::filesystem::path& path);

std::vector<WeakSentence> ParseConll(std::istream& in);
std::vector<WeakSentence> ReadConll(const std::filesystem::path& path);

// Opens a file for reading or throws IoError naming it.
std::ifstream OpenInput(const std::filesystem::path& path);

}  // namespace weakproj::io

#endif  // WEAKPROJ_CORPUS_IO_H_
