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

#ifndef WEAKPROJ_SCORING_H_
#define WEAKPROJ_SCORING_H_

#include <cstddef>
#include <span>
#include <vector>

#include "weakproj/projection.h"
#include "weakproj/types.h"

namespace weakproj::scoring {

inline constexpr double kDefaultKeepFraction = 0.4;

// Confidences for one projected entity, both in (0, 1].
struct EntityRecord {
  double alignment_score = 1.0;
  double ner_score = 1.0;
  friend bool operator==(const EntityRecord&, const EntityRecord&) = default;
};

struct ScoredSentence {
  WeakSentence weak;
  std::vector<EntityRecord> entity_records;

  std::size_t k() const { return entity_records.size(); }
};

// Mean of the entity's target-word alignment scores.
double EntityAlignmentScore(std::span<const double> word_scores);

// (1/k) * sum ln(alignment * ner). Always <= 0.
double SentenceScore(std::span<const EntityRecord> records);

// One record per span that labels at least one target word, in span order.
// Spans whose target words were all taken by other spans are skipped.
std::vector<EntityRecord> CollectEntityRecords(
    std::span<const EntitySpan> spans,
    std::span<const projection::ProjectedWord> projected);

// ceil(fraction * n), robust to representation error in fraction * n.
std::size_t KeepCount(std::size_t n, double fraction);

struct FilterResult {
  std::vector<ScoredSentence> kept;     // ordered by id
  std::vector<ScoredSentence> dropped;  // in rank order
};

// Ranks by (score desc, id asc) and keeps the first KeepCount(n, fraction).
FilterResult FilterTop(std::vector<ScoredSentence> sentences, double fraction);

}  // namespace weakproj::scoring

#endif  // WEAKPROJ_SCORING_H_
