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

#ifndef WEAKPROJ_TYPES_H_
#define WEAKPROJ_TYPES_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "weakproj/tags.h"

namespace weakproj {

using SentenceId = std::int64_t;

// One translation pair; tokens arrive pre-tokenized.
struct SentencePair {
  SentenceId id = 0;
  std::vector<std::string> src_tokens;
  std::vector<std::string> tgt_tokens;
};

// A detected source entity over source words [start, end).
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  EntityType label = EntityType::kPer;
  double ner_score = 1.0;

  bool Contains(std::size_t word) const { return start <= word && word < end; }
  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

enum class Side : std::uint8_t { kSource, kTarget };
enum class Granularity : std::uint8_t { kWord, kSubword };

// Per-token vectors for one side of one sentence. At subword level,
// word_map[i] is the word index of subword row i; it is empty at word level.
struct EmbeddingSet {
  Granularity level = Granularity::kWord;
  Eigen::MatrixXd vectors;
  std::vector<std::size_t> word_map;

  // Number of words the rows cover.
  std::size_t WordCount() const;
};

// Target tokens with projected BIO tags and the sentence quality score.
struct WeakSentence {
  SentenceId id = 0;
  std::vector<std::string> tgt_tokens;
  std::vector<Tag> tags;
  double sentence_score = 0.0;
};

}  // namespace weakproj

#endif  // WEAKPROJ_TYPES_H_
