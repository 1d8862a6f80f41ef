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

#ifndef WEAKPROJ_PROJECTION_H_
#define WEAKPROJ_PROJECTION_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "weakproj/alignment.h"
#include "weakproj/types.h"

namespace weakproj::projection {

// Label carried by one target word after projection. source_span indexes
// the span list passed to ProjectTags; both it and alignment_score are only
// meaningful when label is set.
struct ProjectedWord {
  std::size_t tgt_index = 0;
  std::optional<EntityType> label;
  double alignment_score = 0.0;
  std::optional<std::size_t> source_span;
};

// Copies each span's label to every target word linked from a word inside
// the span. Conflicts keep the highest link score, then the smaller source
// word index, then the earlier label in PER < ORG < LOC < MISC.
std::vector<ProjectedWord> ProjectTags(std::span<const EntitySpan> spans,
                                       std::span<const align::AlignmentLink> links,
                                       std::size_t tgt_len);

// Runs of equal (label, source span) become B-X I-X ...; a new span always
// restarts at B-X.
std::vector<Tag> ToBio(std::span<const ProjectedWord> projected);

// Source words inside some span that are not the source of any link, ascending.
std::vector<std::size_t> CheckEntityCoverage(std::span<const EntitySpan> spans,
                                             std::span<const align::AlignmentLink> links);

// All source word indices covered by the spans, ascending.
std::vector<std::size_t> EntityWords(std::span<const EntitySpan> spans);

}  // namespace weakproj::projection

#endif  // WEAKPROJ_PROJECTION_H_
