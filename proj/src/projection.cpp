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

#include "weakproj/projection.h"

#include <set>
#include <string>

#include "weakproj/errors.h"

namespace weakproj::projection {
namespace {

struct Candidate {
  double score;
  std::size_t src;
  EntityType label;
  std::size_t span;
};

// True when a should replace b.
bool Beats(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.src != b.src) return a.src < b.src;
  return a.label < b.label;
}

std::optional<std::size_t> SpanOf(std::span<const EntitySpan> spans, std::size_t word) {
  for (std::size_t s = 0; s < spans.size(); ++s) {
    if (spans[s].Contains(word)) return s;
  }
  return std::nullopt;
}

}  // namespace

std::vector<ProjectedWord> ProjectTags(std::span<const EntitySpan> spans,
                                       std::span<const align::AlignmentLink> links,
                                       std::size_t tgt_len) {
  std::vector<std::optional<Candidate>> best(tgt_len);
  for (const align::AlignmentLink& link : links) {
    if (link.tgt >= tgt_len) {
      throw ValidationError("link target " + std::to_string(link.tgt) +
                            " out of range for target length " + std::to_string(tgt_len));
    }
    auto span = SpanOf(spans, link.src);
    if (!span) continue;
    Candidate candidate{link.score, link.src, spans[*span].label, *span};
    auto& slot = best[link.tgt];
    if (!slot || Beats(candidate, *slot)) slot = candidate;
  }

  std::vector<ProjectedWord> projected(tgt_len);
  for (std::size_t t = 0; t < tgt_len; ++t) {
    projected[t].tgt_index = t;
    if (!best[t]) continue;
    projected[t].label = best[t]->label;
    projected[t].alignment_score = best[t]->score;
    projected[t].source_span = best[t]->span;
  }
  return projected;
}

std::vector<Tag> ToBio(std::span<const ProjectedWord> projected) {
  std::vector<Tag> tags;
  tags.reserve(projected.size());
  for (std::size_t t = 0; t < projected.size(); ++t) {
    const ProjectedWord& word = projected[t];
    if (!word.label) {
      tags.push_back(Tag::Outside());
      continue;
    }
    bool continues = t > 0 && projected[t - 1].label == word.label &&
                     projected[t - 1].source_span == word.source_span;
    tags.push_back(continues ? Tag::Inside(*word.label) : Tag::Begin(*word.label));
  }
  return tags;
}

std::vector<std::size_t> CheckEntityCoverage(std::span<const EntitySpan> spans,
                                             std::span<const align::AlignmentLink> links) {
  std::set<std::size_t> linked;
  for (const align::AlignmentLink& link : links) linked.insert(link.src);
  std::vector<std::size_t> uncovered;
  for (std::size_t word : EntityWords(spans)) {
    if (!linked.count(word)) uncovered.push_back(word);
  }
  return uncovered;
}

std::vector<std::size_t> EntityWords(std::span<const EntitySpan> spans) {
  std::set<std::size_t> words;
  for (const EntitySpan& span : spans) {
    for (std::size_t w = span.start; w < span.end; ++w) words.insert(w);
  }
  return {words.begin(), words.end()};
}

}  // namespace weakproj::projection
