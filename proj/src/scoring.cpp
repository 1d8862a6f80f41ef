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

#include "weakproj/scoring.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "weakproj/errors.h"

namespace weakproj::scoring {

double EntityAlignmentScore(std::span<const double> word_scores) {
  if (word_scores.empty()) throw ValidationError("entity has no aligned target words");
  double sum = 0.0;
  for (double s : word_scores) {
    if (!(s > 0.0 && s <= 1.0)) throw ValidationError("alignment score out of range (0, 1]");
    sum += s;
  }
  return sum / static_cast<double>(word_scores.size());
}

double SentenceScore(std::span<const EntityRecord> records) {
  if (records.empty()) throw ValidationError("no entities");
  double sum = 0.0;
  for (const EntityRecord& r : records) {
    if (!(r.alignment_score > 0.0 && r.alignment_score <= 1.0)) {
      throw ValidationError("alignment score out of range (0, 1]");
    }
    if (!(r.ner_score > 0.0 && r.ner_score <= 1.0)) {
      throw ValidationError("ner_score out of range (0, 1]");
    }
    sum += std::log(r.alignment_score * r.ner_score);
  }
  return sum / static_cast<double>(records.size());
}

std::vector<EntityRecord> CollectEntityRecords(
    std::span<const EntitySpan> spans,
    std::span<const projection::ProjectedWord> projected) {
  std::vector<std::vector<double>> word_scores(spans.size());
  for (const projection::ProjectedWord& word : projected) {
    if (!word.label || !word.source_span) continue;
    if (*word.source_span >= spans.size()) {
      throw ValidationError("projected word refers to an unknown span");
    }
    word_scores[*word.source_span].push_back(word.alignment_score);
  }
  std::vector<EntityRecord> records;
  for (std::size_t s = 0; s < spans.size(); ++s) {
    if (word_scores[s].empty()) continue;
    records.push_back({EntityAlignmentScore(word_scores[s]), spans[s].ner_score});
  }
  return records;
}

std::size_t KeepCount(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("keep fraction must be in (0, 1], got " + std::to_string(fraction));
  }
  if (n == 0) return 0;
  double raw = fraction * static_cast<double>(n);
  auto count = static_cast<std::size_t>(std::ceil(raw - raw * 1e-12));
  return std::clamp<std::size_t>(count, 1, n);
}

FilterResult FilterTop(std::vector<ScoredSentence> sentences, double fraction) {
  const std::size_t keep = KeepCount(sentences.size(), fraction);
  std::sort(sentences.begin(), sentences.end(),
            [](const ScoredSentence& a, const ScoredSentence& b) {
              if (a.weak.sentence_score != b.weak.sentence_score) {
                return a.weak.sentence_score > b.weak.sentence_score;
              }
              return a.weak.id < b.weak.id;
            });
  FilterResult result;
  auto cut = sentences.begin() + static_cast<std::ptrdiff_t>(keep);
  result.kept.assign(std::make_move_iterator(sentences.begin()), std::make_move_iterator(cut));
  result.dropped.assign(std::make_move_iterator(cut), std::make_move_iterator(sentences.end()));
  std::sort(result.kept.begin(), result.kept.end(),
            [](const ScoredSentence& a, const ScoredSentence& b) { return a.weak.id < b.weak.id; });
  return result;
}

}  // namespace weakproj::scoring
